#ifndef BOSE_EXPAND_TERMS_HPP
#define BOSE_EXPAND_TERMS_HPP

#include <cstddef>
#include <vector>

#include "model.hpp"

namespace bose_expand {

/// amplitude * a*_{c1} a*_{c2} a_{a1} a_{a2}, indices into the ModeSet; the 1/(N-1) coupling is not included.
struct QuarticTerm {
    std::size_t c1, c2, a1, a2;
    double amplitude;
};

/// All terms v_hat(k)/2 a*_{p+k} a*_{q-k} a_q a_p with every momentum inside the mode set.
/// Transfers that would leave the set are dropped.
inline std::vector<QuarticTerm> interaction_terms(const ModeSet& modes, const PairPotential& v) {
    std::vector<QuarticTerm> terms;
    const int d = modes.dimension();
    for (std::size_t p = 0; p < modes.size(); ++p)
        for (std::size_t q = 0; q < modes.size(); ++q)
            for (std::size_t r = 0; r < modes.size(); ++r) {
                const Momentum k = modes[r] - modes[p];
                const auto s = modes.find(modes[q] - k);
                if (!s) continue;
                const double w = v.fourier(k, d);
                if (w == 0.0) continue;
                terms.push_back({r, *s, q, p, 0.5 * w});
            }
    return terms;
}

inline std::vector<QuarticTerm> interaction_terms(const CutoffModel& m) {
    return interaction_terms(m.modes, m.potential);
}

} // namespace bose_expand

#endif
