#ifndef BOSE_EXPAND_BOSE_EXPAND_HPP
#define BOSE_EXPAND_BOSE_EXPAND_HPP

#include "errors.hpp"
#include "model.hpp"
#include "terms.hpp"
#include "hartree.hpp"
#include "fock.hpp"
#include "bogoliubov.hpp"
#include "perturbation.hpp"
#include "parallel.hpp"
#include "oracle.hpp"
#include "edgeworth.hpp"
#include "binding.hpp"
#include "dynamics.hpp"
#include "config.hpp"
#include "validation.hpp"

#endif
