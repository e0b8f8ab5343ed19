#ifndef BOSE_EXPAND_EDGEWORTH_HPP
#define BOSE_EXPAND_EDGEWORTH_HPP

// Fluctuations of B_N = N^{-1/2} (sum_j B_j - E[sum_j B_j]) in the ground state:
// Gaussian width sigma, the third-cumulant coefficient alpha and the first
// Edgeworth correction p1 built from the third Hermite polynomial.

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "bogoliubov.hpp"
#include "errors.hpp"
#include "hartree.hpp"
#include "model.hpp"
#include "oracle.hpp"
#include "perturbation.hpp"

namespace bose_expand {

/// Multiplication by sum_h cos(2 pi h x_1) over the given harmonics: B(p, p +- h e_1) = 1/2 within the cutoff.
inline Eigen::MatrixXcd cosine_observable(const ModeSet& modes, const std::vector<int>& harmonics) {
    const auto m = static_cast<Eigen::Index>(modes.size());
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(m, m);
    for (int h : harmonics) {
        if (h <= 0) throw ValidationError("cosine harmonics must be positive");
        for (std::size_t i = 0; i < modes.size(); ++i)
            for (int s : {-h, h}) {
                Momentum n = modes[i];
                n[0] += s;
                if (auto j = modes.find(n)) b(static_cast<Eigen::Index>(*j), static_cast<Eigen::Index>(i)) += 0.5;
            }
    }
    return b;
}

/// Multiplication by cos(2 pi x_1).
inline Eigen::MatrixXcd hopping_observable(const ModeSet& modes) { return cosine_observable(modes, {1}); }

/// Projector |e_p><e_p| onto one mode.
inline Eigen::MatrixXcd mode_projector(const ModeSet& modes, std::size_t index) {
    const auto m = static_cast<Eigen::Index>(modes.size());
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(m, m);
    b(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
    return b;
}

struct FluctuationObservable {
    Eigen::MatrixXcd B;
    /// q B phi over the full mode set.
    Eigen::VectorXcd qBphi;
    /// nu over the local excitation modes.
    Eigen::VectorXcd nu;
    double sigma = 0.0;
};

inline FluctuationObservable compute_nu_sigma(const Eigen::MatrixXcd& b, const HartreeState& hartree,
                                              const BogoliubovMap& map) {
    detail::require_hermitian_mode_matrix(b);
    const ModeSet& modes = map.h0.modes;
    detail::require_homogeneous(hartree, modes);
    FluctuationObservable obs;
    obs.B = b;
    const Eigen::VectorXcd& phi = hartree.phi;
    const Eigen::VectorXcd bphi = b * phi;
    obs.qBphi = bphi - phi.dot(bphi) * phi;
    const auto nonzero = modes.nonzero_indices();
    obs.nu.resize(static_cast<Eigen::Index>(nonzero.size()));
    for (std::size_t j = 0; j < nonzero.size(); ++j) {
        const cplx f = obs.qBphi[static_cast<Eigen::Index>(nonzero[j])];
        const cplx fneg = obs.qBphi[static_cast<Eigen::Index>(nonzero[map.negation(j)])];
        obs.nu[static_cast<Eigen::Index>(j)] = map.u[j] * f - map.v[j] * std::conj(fneg);
    }
    obs.sigma = obs.nu.norm();
    return obs;
}

/// sigma_iid^2 = <phi, B^2 phi> - <phi, B phi>^2; returns sigma_iid.
inline double iid_baseline(const Eigen::MatrixXcd& b, const Eigen::VectorXcd& phi) {
    detail::require_hermitian_mode_matrix(b);
    const Eigen::VectorXcd bphi = b * phi;
    const double m1 = phi.dot(bphi).real();
    const double m2 = bphi.squaredNorm();
    return std::sqrt(std::max(0.0, m2 - m1 * m1));
}

struct AlphaEstimate {
    double value = 0.0;
    double error = 0.0;
    /// (N, sqrt(N) kappa_3) used by the extrapolation.
    std::vector<std::pair<double, double>> points;
};

enum class AlphaStrategy { oracle_extrapolation, chi1_perturbative };

namespace detail {

inline OperatorPoly creation_field(const Eigen::VectorXcd& f_local) {
    OperatorPoly p;
    for (Eigen::Index j = 0; j < f_local.size(); ++j)
        if (f_local[j] != 0.0) {
            p.push_back({f_local[j], {cr(static_cast<std::size_t>(j))}});
            p.push_back({std::conj(f_local[j]), {an(static_cast<std::size_t>(j))}});
        }
    return p;
}

} // namespace detail

/// The perturbative alpha from chi0 and chi1: with X = B0 + N^{-1/2} D,
/// alpha = 2 Re<chi1, B0^3 chi0> + <chi0, (B0^2 D + B0 D B0 + D B0^2) chi0> - 3 c1 <chi0, B0^2 chi0>,
/// c1 = 2 Re<chi1, B0 chi0> + <chi0, D chi0>.
inline AlphaEstimate alpha_perturbative(const CutoffModel& model, const Eigen::MatrixXcd& b,
                                        int k_max = default_chi0_sectors) {
    const StaticExpansion s = expand_static(model);
    const FluctuationObservable obs = compute_nu_sigma(b, s.hartree, s.map);
    if (obs.sigma == 0.0) throw ValidationError("degenerate observable: sigma = 0");
    const auto nonzero = model.modes.nonzero_indices();
    const std::size_t zero = model.modes.zero_index();
    Eigen::VectorXcd f(static_cast<Eigen::Index>(nonzero.size()));
    for (std::size_t j = 0; j < nonzero.size(); ++j) f[static_cast<Eigen::Index>(j)] = obs.qBphi[static_cast<Eigen::Index>(nonzero[j])];
    const OperatorPoly b0 = detail::creation_field(f);
    OperatorPoly d;
    const cplx b00 = b(static_cast<Eigen::Index>(zero), static_cast<Eigen::Index>(zero));
    for (std::size_t j = 0; j < nonzero.size(); ++j)
        for (std::size_t l = 0; l < nonzero.size(); ++l) {
            cplx w = b(static_cast<Eigen::Index>(nonzero[j]), static_cast<Eigen::Index>(nonzero[l]));
            if (j == l) w -= b00;
            if (w != 0.0) d.push_back({w, {cr(j), an(l)}});
        }

    const QuasifreeState chi0 = chi0_state_adaptive(s.map, k_max);
    const ExcitationBasis big(model.modes, chi0.basis.k_max() + 6);
    const Eigen::VectorXcd x0 = rebase(chi0.coefficients, chi0.basis, big);
    const Eigen::VectorXcd x1 = chi1_vector(s.chi1, s.map, big, x0, big);
    auto op = [&](const OperatorPoly& p, const Eigen::VectorXcd& v) { return apply(p, big, v, big); };
    const Eigen::VectorXcd bx = op(b0, x0);
    const Eigen::VectorXcd bbx = op(b0, bx);
    const Eigen::VectorXcd bbbx = op(b0, bbx);
    const Eigen::VectorXcd dx = op(d, x0);
    const Eigen::VectorXcd dbx = op(d, bx);
    const double term1 = 2.0 * x1.dot(bbbx).real();
    const double term2 = bbx.dot(dx).real() + bx.dot(dbx).real() + dx.dot(bbx).real();
    const double c1 = 2.0 * x1.dot(bx).real() + x0.dot(dx).real();
    AlphaEstimate a;
    a.value = term1 + term2 - 3.0 * c1 * bx.squaredNorm();
    // truncation of chi0 is the only approximation; bound it by the mass defect
    a.error = 10.0 * std::sqrt(std::max(chi0.defect, 1e-16)) * (std::abs(term1) + std::abs(term2) + std::abs(c1));
    return a;
}

/// Extrapolates sqrt(N) kappa_3 of precomputed samples to N -> infinity in powers of 1/N.
inline AlphaEstimate alpha_from_samples(const std::vector<SpectralSample>& samples) {
    if (samples.size() < 4) throw FitError("alpha extrapolation needs at least 4 particle numbers");
    AlphaEstimate a;
    for (const auto& s : samples)
        a.points.emplace_back(static_cast<double>(s.particles), std::sqrt(static_cast<double>(s.particles)) * s.cumulants()[2]);
    const Extrapolation e = extrapolate(a.points, 2);
    a.value = e.value;
    a.error = e.error;
    return a;
}

/// sqrt(N) kappa_3[B_N] from exact ground states, extrapolated to N -> infinity.
inline AlphaEstimate alpha_oracle(const CutoffModel& model, const Eigen::MatrixXcd& b, const std::vector<int>& ns,
                                  int workers = 1) {
    if (ns.size() < 4) throw FitError("alpha extrapolation needs at least 4 particle numbers");
    std::vector<SpectralSample> samples(ns.size());
    parallel_for(ns.size(), workers, [&](std::size_t i) {
        const auto gs = model_ground_state(model.with_particles(ns[i]));
        samples[i] = observable_statistics(gs.state.vector, gs.basis, b);
    });
    return alpha_from_samples(samples);
}

inline AlphaEstimate estimate_alpha(const CutoffModel& model, const Eigen::MatrixXcd& b, AlphaStrategy strategy,
                                    const std::vector<int>& ns = {8, 12, 16, 20, 24}, int workers = 1) {
    const StaticExpansion s = expand_static(model);
    if (compute_nu_sigma(b, s.hartree, s.map).sigma == 0.0) throw ValidationError("degenerate observable: sigma = 0");
    return strategy == AlphaStrategy::oracle_extrapolation ? alpha_oracle(model, b, ns, workers)
                                                           : alpha_perturbative(model, b);
}

struct EdgeworthPrediction {
    double sigma = 0.0;
    double alpha = 0.0;
    double alpha_error = 0.0;
    double sigma_iid = 0.0;
    /// Terms p_j with j >= 2 are not available in closed form.
    bool higher_orders_available = false;
};

/// H3(x) = x^3 - 3x.
inline double hermite3(double x) { return x * x * x - 3.0 * x; }

/// p1(x) = alpha / (6 sigma^3) H3(x / sigma).
inline double p1(const EdgeworthPrediction& pred, double x) {
    if (pred.sigma == 0.0) return 0.0;
    const double s3 = pred.sigma * pred.sigma * pred.sigma;
    return pred.alpha / (6.0 * s3) * hermite3(x / pred.sigma);
}

/// Admissible test functions: Gaussian-windowed cosines, or a tabulated compactly supported g.
struct TestFunction {
    enum class Kind { gaussian_cosine, table };
    Kind kind = Kind::gaussian_cosine;
    double omega = 0.0;
    std::vector<double> xs, ys;

    static TestFunction gaussian_cosine(double w) { return {Kind::gaussian_cosine, w, {}, {}}; }
    static TestFunction table(std::vector<double> x, std::vector<double> y) {
        return {Kind::table, 0.0, std::move(x), std::move(y)};
    }

    void validate() const {
        if (kind == Kind::gaussian_cosine) {
            if (!std::isfinite(omega)) throw ValidationError("test function frequency must be finite");
            return;
        }
        if (xs.size() < 3 || xs.size() != ys.size()) throw ValidationError("tabulated test function needs matching x/y of length >= 3");
        for (std::size_t i = 1; i < xs.size(); ++i)
            if (!(xs[i] > xs[i - 1])) throw ValidationError("tabulated test function abscissae must increase");
        if (ys.front() != 0.0 || ys.back() != 0.0)
            throw ValidationError("tabulated test function must vanish at both ends of its support");
    }

    bool even() const { return kind == Kind::gaussian_cosine; }

    double operator()(double x) const {
        if (kind == Kind::gaussian_cosine) return std::exp(-0.5 * x * x) * std::cos(omega * x);
        if (x <= xs.front() || x >= xs.back()) return 0.0;
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - xs.begin());
        const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        return ys[i - 1] + t * (ys[i] - ys[i - 1]);
    }
};

namespace detail {

/// int g(x) w(x) N(0, sigma^2)(x) dx over the real line.
inline double gaussian_integral(const std::function<double(double)>& g, const std::function<double(double)>& w,
                                double sigma, double tol = 1e-12) {
    using boost::math::quadrature::gauss_kronrod;
    if (sigma == 0.0) return g(0.0) * w(0.0);
    const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
    auto f = [&](double x) { return g(x) * w(x) * norm * std::exp(-0.5 * x * x / (sigma * sigma)); };
    double err = 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    return gauss_kronrod<double, 61>::integrate(f, -inf, inf, 15, tol, &err);
}

} // namespace detail

/// sum_{j <= order} N^{-j/2} int g p_j N(0, sigma^2).
inline double predict_expectation(const std::function<double(double)>& g, bool g_even, const EdgeworthPrediction& pred,
                                  int order, int n) {
    if (order < 0 || order > 1) throw ValidationError("only orders 0 and 1 are available");
    const double base = detail::gaussian_integral(g, [](double) { return 1.0; }, pred.sigma);
    if (order == 0 || g_even || pred.alpha == 0.0) return base;
    const double corr = detail::gaussian_integral(g, [&](double x) { return p1(pred, x); }, pred.sigma);
    return base + corr / std::sqrt(static_cast<double>(n));
}

inline double predict_expectation(const TestFunction& g, const EdgeworthPrediction& pred, int order, int n) {
    g.validate();
    return predict_expectation([&](double x) { return g(x); }, g.even(), pred, order, n);
}

/// e^{-sigma^2 k^2 / 2} (1 + N^{-1/2} (alpha / 6) (ik)^3) at order 1.
inline cplx characteristic_prediction(double k, const EdgeworthPrediction& pred, int order, int n) {
    const double gauss = std::exp(-0.5 * pred.sigma * pred.sigma * k * k);
    if (order == 0) return gauss;
    const cplx ik3 = std::pow(cplx(0.0, k), 3);
    return gauss * (1.0 + pred.alpha / 6.0 * ik3 / std::sqrt(static_cast<double>(n)));
}

} // namespace bose_expand

#endif
