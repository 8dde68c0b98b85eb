#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graphrd/alphabet.hpp"
#include "graphrd/ball.hpp"
#include "graphrd/distortion.hpp"
#include "graphrd/errors.hpp"
#include "graphrd/measure.hpp"

namespace graphrd {

// Truncated product-Poisson kernel on balls: atoms(a,l) proportional to
// sigma(a) * prod_b Poisson(pi(a,b)/sigma(a))(l(b)) with every count capped at
// L_max, then renormalized. support/probs mirror the atom map in its sorted
// order for index-based sweeps.
struct Kernel {
    Alphabet alphabet;
    ColorMeasure sigma;
    PairMeasure pi;
    std::int32_t L_max = 0;
    double truncation_mass = 0.0;
    double tail_tol = 0.0;
    std::map<Ball, double> atoms;
    std::vector<Ball> support;
    std::vector<double> probs;

    double prob(const Ball& b) const {
        auto it = atoms.find(b);
        return it == atoms.end() ? 0.0 : it->second;
    }
};

inline BallMeasure kernel_measure(const Kernel& K) {
    BallMeasure out;
    out.atoms = K.atoms;
    return out;
}

namespace detail {

inline double poisson_pmf(double lambda, std::int64_t k) {
    if (lambda == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(static_cast<double>(k) * std::log(lambda) - lambda -
                    std::lgamma(static_cast<double>(k) + 1.0));
}

inline double poisson_cdf(double lambda, std::int64_t k) {
    double s = 0.0;
    for (std::int64_t j = 0; j <= k; ++j) s += poisson_pmf(lambda, j);
    return std::min(s, 1.0);
}

}  // namespace detail

// Smallest cap L_max with outside-the-box mass below tail_tol, then
// enumerate, drop zero-probability atoms, and renormalize.
inline Kernel build_kernel(const ColorMeasure& sigma, const PairMeasure& pi, double tail_tol,
                           std::optional<Alphabet> alphabet = std::nullopt,
                           std::int32_t cap_limit = 4096,
                           std::size_t max_atoms = 4'000'000) {
    sigma.require_probability(1e-12);
    pi.require_valid();
    if (sigma.size() != pi.m) {
        throw ValidationError("sigma and pi disagree on the number of colors");
    }
    if (!(tail_tol > 0.0) || tail_tol >= 1.0) {
        throw ValidationError("tail tolerance must lie in (0,1)");
    }
    const std::size_t m = sigma.size();

    Kernel K;
    if (alphabet) {
        if (alphabet->size() != m) throw ValidationError("alphabet size does not match sigma");
        K.alphabet = *alphabet;
    } else {
        std::vector<std::string> names;
        for (std::size_t a = 0; a < m; ++a) names.push_back("c" + std::to_string(a));
        K.alphabet = Alphabet(names);
    }
    K.sigma = sigma;
    K.pi = pi;
    K.tail_tol = tail_tol;

    // Poisson rates lambda(a,b) = pi(a,b)/sigma(a); colors with sigma(a)=0
    // must carry no intensity.
    std::vector<double> lambda(m * m, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
            if (pi(a, b) == 0.0) continue;
            if (sigma(a) == 0.0) {
                throw ValidationError("pi(" + K.alphabet.name(a) + "," + K.alphabet.name(b) +
                                      ") > 0 but sigma(" + K.alphabet.name(a) + ") = 0");
            }
            lambda[a * m + b] = pi(a, b) / sigma(a);
        }
    }

    auto outside_mass = [&](std::int64_t cap) {
        double inside = 0.0;
        for (std::size_t a = 0; a < m; ++a) {
            if (sigma(a) == 0.0) continue;
            double f = sigma(a);
            for (std::size_t b = 0; b < m; ++b) {
                const double l = lambda[a * m + b];
                if (l > 0.0) f *= detail::poisson_cdf(l, cap);
            }
            inside += f;
        }
        return 1.0 - inside;
    };

    std::int32_t cap = 0;
    while (outside_mass(cap) >= tail_tol) {
        if (++cap > cap_limit) {
            throw ValidationError("tail tolerance unreachable within the degree cap limit");
        }
    }
    K.L_max = cap;

    // Count atoms before enumerating; zero-rate colors contribute a single
    // degree value.
    double estimated = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
        if (sigma(a) == 0.0) continue;
        double per = 1.0;
        for (std::size_t b = 0; b < m; ++b) {
            per *= lambda[a * m + b] > 0.0 ? static_cast<double>(cap + 1) : 1.0;
        }
        estimated += per;
    }
    if (estimated > static_cast<double>(max_atoms)) {
        throw ExplosionError("kernel support would hold about " + std::to_string(estimated) +
                                 " atoms (limit " + std::to_string(max_atoms) + ")",
                             estimated);
    }

    double raw_total = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
        if (sigma(a) == 0.0) continue;
        std::vector<std::int32_t> hi(m, 0);
        for (std::size_t b = 0; b < m; ++b) {
            if (lambda[a * m + b] > 0.0) hi[b] = cap;
        }
        DegreeVector deg(m);
        // Odometer sweep over the box.
        for (;;) {
            double w = sigma(a);
            for (std::size_t b = 0; b < m; ++b) {
                const double l = lambda[a * m + b];
                if (l > 0.0) w *= detail::poisson_pmf(l, deg.counts[b]);
            }
            if (w > 0.0) {
                K.atoms[Ball(static_cast<std::int32_t>(a), deg)] = w;
                raw_total += w;
            }
            std::size_t b = 0;
            while (b < m && deg.counts[b] == hi[b]) {
                deg.counts[b] = 0;
                ++b;
            }
            if (b == m) break;
            deg.counts[b] += 1;
        }
    }
    if (!(raw_total > 0.0)) throw ValidationError("kernel has no mass inside the box");

    K.truncation_mass = std::max(0.0, 1.0 - raw_total);
    K.support.reserve(K.atoms.size());
    K.probs.reserve(K.atoms.size());
    for (auto& [ball, w] : K.atoms) {
        w /= raw_total;
        K.support.push_back(ball);
        K.probs.push_back(w);
    }
    return K;
}

// Independent product K (x) K on ball pairs.
inline JointBallMeasure product_kernel(const Kernel& K, std::size_t max_atoms = 4'000'000) {
    const std::size_t A = K.support.size();
    if (A * A > max_atoms) {
        throw ExplosionError("product kernel would hold " + std::to_string(A * A) + " atoms",
                             static_cast<double>(A) * static_cast<double>(A));
    }
    JointBallMeasure out;
    for (std::size_t x = 0; x < A; ++x) {
        for (std::size_t y = 0; y < A; ++y) {
            out.atoms[{K.support[x], K.support[y]}] = K.probs[x] * K.probs[y];
        }
    }
    return out;
}

// Workspace for Lambda(t) = sum_x K(x) log sum_y K(y) exp(t rho(x,y)) and its
// derivative. The pairwise distortion matrix is evaluated once; all sums run
// in log-sum-exp form, so large |t| cannot overflow.
class LogMgf {
public:
    LogMgf(const Kernel& K, const DistortionFn& rho, std::size_t max_entries = 4'000'000)
        : A_(K.support.size()) {
        if (A_ == 0) throw ValidationError("kernel has empty support");
        if (A_ * A_ > max_entries) {
            throw ExplosionError("distortion matrix would hold " + std::to_string(A_ * A_) +
                                     " entries",
                                 static_cast<double>(A_) * static_cast<double>(A_));
        }
        p_ = K.probs;
        logp_.resize(A_);
        for (std::size_t i = 0; i < A_; ++i) logp_[i] = std::log(p_[i]);
        rho_.resize(A_ * A_);
        for (std::size_t x = 0; x < A_; ++x) {
            for (std::size_t y = 0; y < A_; ++y) {
                const double r = rho(K.support[x], K.support[y]);
                if (!(r >= 0.0) || !std::isfinite(r)) {
                    throw ValidationError("distortion must be finite and nonnegative on the "
                                          "kernel support");
                }
                rho_[x * A_ + y] = r;
            }
        }
    }

    std::size_t support_size() const noexcept { return A_; }

    double lambda(double t) const {
        double out = 0.0;
        for (std::size_t x = 0; x < A_; ++x) {
            double peak = -kInf;
            for (std::size_t y = 0; y < A_; ++y) {
                peak = std::max(peak, logp_[y] + t * rho_[x * A_ + y]);
            }
            double s = 0.0;
            for (std::size_t y = 0; y < A_; ++y) {
                s += std::exp(logp_[y] + t * rho_[x * A_ + y] - peak);
            }
            out += p_[x] * (peak + std::log(s));
        }
        return out;
    }

    // Lambda'(t), the tilted mean distortion.
    double lambda_prime(double t) const {
        double out = 0.0;
        for (std::size_t x = 0; x < A_; ++x) {
            double peak = -kInf;
            for (std::size_t y = 0; y < A_; ++y) {
                peak = std::max(peak, logp_[y] + t * rho_[x * A_ + y]);
            }
            double s = 0.0;
            double sr = 0.0;
            for (std::size_t y = 0; y < A_; ++y) {
                const double w = std::exp(logp_[y] + t * rho_[x * A_ + y] - peak);
                s += w;
                sr += w * rho_[x * A_ + y];
            }
            out += p_[x] * (sr / s);
        }
        return out;
    }

    double d_av() const {
        double out = 0.0;
        for (std::size_t x = 0; x < A_; ++x) {
            for (std::size_t y = 0; y < A_; ++y) out += p_[x] * p_[y] * rho_[x * A_ + y];
        }
        return out;
    }

    double d_min() const {
        double out = 0.0;
        for (std::size_t x = 0; x < A_; ++x) out += p_[x] * row_extreme(x, true);
        return out;
    }

    double d_max() const {
        double out = 0.0;
        for (std::size_t x = 0; x < A_; ++x) out += p_[x] * row_extreme(x, false);
        return out;
    }

    // One-sided limit of the dual at d_min: -sum_x K(x) log K{y : rho(x,y)
    // minimal}.
    double boundary_rate_min() const { return boundary_rate(true); }
    double boundary_rate_max() const { return boundary_rate(false); }

private:
    double row_extreme(std::size_t x, bool take_min) const {
        double e = rho_[x * A_];
        for (std::size_t y = 1; y < A_; ++y) {
            const double r = rho_[x * A_ + y];
            e = take_min ? std::min(e, r) : std::max(e, r);
        }
        return e;
    }

    double boundary_rate(bool take_min) const {
        double out = 0.0;
        for (std::size_t x = 0; x < A_; ++x) {
            const double e = row_extreme(x, take_min);
            double mass = 0.0;
            for (std::size_t y = 0; y < A_; ++y) {
                if (rho_[x * A_ + y] == e) mass += p_[y];
            }
            out -= p_[x] * std::log(mass);
        }
        return out;
    }

    std::size_t A_;
    std::vector<double> p_;
    std::vector<double> logp_;
    std::vector<double> rho_;
};

inline double log_mgf(const Kernel& K, const DistortionFn& rho, double t) {
    return LogMgf(K, rho).lambda(t);
}

inline double d_min(const Kernel& K, const DistortionFn& rho) { return LogMgf(K, rho).d_min(); }
inline double d_av(const Kernel& K, const DistortionFn& rho) { return LogMgf(K, rho).d_av(); }

// Exponentially tilted coupling nu_t(x,y) = K(x) K(y) e^{t rho(x,y)} / Z(x,t),
// normalized per x so the first marginal stays K.
struct TiltedCoupling {
    double t = 0.0;
    JointBallMeasure atoms;
    double mean_distortion = 0.0;
    double entropy = 0.0;  // H(nu_t || K (x) K), summed directly
};

inline TiltedCoupling tilted_coupling(const Kernel& K, const DistortionFn& rho, double t,
                                      std::size_t max_atoms = 4'000'000) {
    if (!std::isfinite(t)) throw ValidationError("tilt parameter must be finite");
    const std::size_t A = K.support.size();
    if (A == 0) throw ValidationError("kernel has empty support");
    if (A * A > max_atoms) {
        throw ExplosionError("tilted coupling would hold " + std::to_string(A * A) + " atoms",
                             static_cast<double>(A) * static_cast<double>(A));
    }
    std::vector<double> logp(A);
    for (std::size_t i = 0; i < A; ++i) logp[i] = std::log(K.probs[i]);

    TiltedCoupling out;
    out.t = t;
    std::vector<double> row(A);
    for (std::size_t x = 0; x < A; ++x) {
        double peak = -kInf;
        for (std::size_t y = 0; y < A; ++y) {
            row[y] = logp[y] + t * rho(K.support[x], K.support[y]);
            peak = std::max(peak, row[y]);
        }
        double z = 0.0;
        for (std::size_t y = 0; y < A; ++y) {
            row[y] = std::exp(row[y] - peak);
            z += row[y];
        }
        for (std::size_t y = 0; y < A; ++y) {
            const double v = K.probs[x] * row[y] / z;
            if (v <= 0.0) continue;
            out.atoms.atoms[{K.support[x], K.support[y]}] = v;
            out.mean_distortion += v * rho(K.support[x], K.support[y]);
            out.entropy += v * std::log(v / (K.probs[x] * K.probs[y]));
        }
    }
    return out;
}

enum class RateStatus { exact, clamped_zero, infinite, boundary };

inline const char* rate_status_name(RateStatus s) {
    switch (s) {
        case RateStatus::exact: return "exact";
        case RateStatus::clamped_zero: return "clamped_zero";
        case RateStatus::infinite: return "infinite";
        case RateStatus::boundary: return "boundary";
    }
    return "?";
}

struct RateResult {
    double d = 0.0;
    double R = 0.0;
    double t_star = 0.0;  // -inf when the optimum escapes the bracket
    RateStatus status = RateStatus::exact;
    double truncation_mass = 0.0;
    // d sits within 1e-9 of the smallest d with finite rate; the limit point
    // is excluded from the convergence statement, so flag it.
    bool at_dmin_diagnostic = false;
    double root_gap = 0.0;  // achieved |Lambda'(t*) - d|
};

namespace detail {

// Bisection for Lambda'(t) = target on [lo, hi]; Lambda' is nondecreasing.
// Returns the best midpoint and its residual.
inline std::pair<double, double> bisect_lambda_prime(const LogMgf& lm, double target, double lo,
                                                     double hi, double tol) {
    double best_t = hi;
    double best_gap = std::abs(lm.lambda_prime(hi) - target);
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double g = lm.lambda_prime(mid) - target;
        if (std::abs(g) < best_gap) {
            best_gap = std::abs(g);
            best_t = mid;
        }
        if (best_gap <= tol) break;
        if (g > 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return {best_t, best_gap};
}

}  // namespace detail

// Legendre dual R(d) = sup_{t<=0} (t d - Lambda(t)) over the shared LogMgf
// workspace; trunc_mass is carried through for reporting.
inline RateResult rate_distortion_with(const LogMgf& lm, double trunc_mass, double d) {
    RateResult r;
    r.d = d;
    r.truncation_mass = trunc_mass;
    const double dmin = lm.d_min();
    const double dav = lm.d_av();
    r.at_dmin_diagnostic = std::abs(d - dmin) <= 1e-9;
    if (d < dmin) {
        r.R = kInf;
        r.t_star = -kInf;
        r.status = RateStatus::infinite;
        return r;
    }
    if (d == dmin) {
        r.R = lm.boundary_rate_min();
        r.t_star = -kInf;
        r.status = RateStatus::boundary;
        return r;
    }
    if (d >= dav) {
        r.R = 0.0;
        r.t_star = 0.0;
        r.status = RateStatus::clamped_zero;
        return r;
    }
    const double lo = -64.0;
    if (lm.lambda_prime(lo) > d) {
        // The optimizer escapes the bracket; treat as the d_min limit.
        r.R = lm.boundary_rate_min();
        r.t_star = -kInf;
        r.status = RateStatus::boundary;
        return r;
    }
    const double tol = 1e-10 * std::max(1.0, dav);
    const auto [t, gap] = detail::bisect_lambda_prime(lm, d, lo, 0.0, tol);
    r.t_star = t;
    r.root_gap = gap;
    r.R = std::max(0.0, t * d - lm.lambda(t));
    r.status = RateStatus::exact;
    return r;
}

inline RateResult rate_distortion(const Kernel& K, const DistortionFn& rho, double d) {
    return rate_distortion_with(LogMgf(K, rho), K.truncation_mass, d);
}

// Two-sided Legendre transform I_rho(z) = sup_t (t z - Lambda(t)); +inf
// outside the closed range of Lambda'.
inline double distortion_ldp_rate_with(const LogMgf& lm, double z) {
    const double dmin = lm.d_min();
    const double dmax = lm.d_max();
    if (z < dmin || z > dmax) return kInf;
    if (z == dmin) return lm.boundary_rate_min();
    if (z == dmax) return lm.boundary_rate_max();
    const double lo = -64.0;
    const double hi = 64.0;
    if (lm.lambda_prime(lo) > z) return lm.boundary_rate_min();
    if (lm.lambda_prime(hi) < z) return lm.boundary_rate_max();
    const double tol = 1e-10 * std::max(1.0, std::abs(z) + lm.d_av());
    const auto [t, gap] = detail::bisect_lambda_prime(lm, z, lo, hi, tol);
    (void)gap;
    return std::max(0.0, t * z - lm.lambda(t));
}

inline double distortion_ldp_rate(const Kernel& K, const DistortionFn& rho, double z) {
    return distortion_ldp_rate_with(LogMgf(K, rho), z);
}

enum class MarginalMode { colors, full_ball };

namespace detail {

inline void require_inside_box(const Ball& b, const Kernel& K) {
    if (b.deg.size() != K.sigma.size()) {
        throw ValidationError("ball arity does not match the kernel alphabet");
    }
    if (b.color < 0 || static_cast<std::size_t>(b.color) >= K.sigma.size()) {
        throw ValidationError("ball color outside the kernel alphabet");
    }
    for (auto c : b.deg.counts) {
        if (c > K.L_max) {
            throw TruncationError("ball " + format_ball(b, K.alphabet) +
                                  " lies outside the truncated box (L_max = " +
                                  std::to_string(K.L_max) + ")");
        }
    }
}

// Sup-norm gap between a per-coordinate color mass vector and sigma.
inline double color_marginal_gap(const std::vector<double>& mass, const ColorMeasure& sigma) {
    double worst = 0.0;
    for (std::size_t a = 0; a < sigma.size(); ++a) {
        worst = std::max(worst, std::abs(mass[a] - sigma(a)));
    }
    return worst;
}

}  // namespace detail

// I_1 restricted to the truncated box: H(nu || K (x) K) when nu is consistent
// and both color marginals match sigma within tol; +inf when either condition
// fails. full_ball mode replaces the color check with total variation against
// the kernel itself.
inline double eval_I1(const JointBallMeasure& nu, const Kernel& K, double tol,
                      MarginalMode mode = MarginalMode::colors) {
    nu.require_probability(1e-9);
    const std::size_t m = K.sigma.size();
    for (const auto& [pair, v] : nu.atoms) {
        detail::require_inside_box(pair.first, K);
        detail::require_inside_box(pair.second, K);
    }
    if (!is_consistent(nu, tol).consistent) return kInf;
    if (mode == MarginalMode::colors) {
        std::vector<double> mass1(m, 0.0);
        std::vector<double> mass2(m, 0.0);
        for (const auto& [pair, v] : nu.atoms) {
            mass1[static_cast<std::size_t>(pair.first.color)] += v;
            mass2[static_cast<std::size_t>(pair.second.color)] += v;
        }
        if (detail::color_marginal_gap(mass1, K.sigma) > tol) return kInf;
        if (detail::color_marginal_gap(mass2, K.sigma) > tol) return kInf;
    } else {
        const BallMeasure ref = kernel_measure(K);
        if (total_variation(ball_marginal(nu, 0), ref) > tol) return kInf;
        if (total_variation(ball_marginal(nu, 1), ref) > tol) return kInf;
    }
    double h = 0.0;
    for (const auto& [pair, v] : nu.atoms) {
        if (v == 0.0) continue;
        const double q = K.prob(pair.first) * K.prob(pair.second);
        if (q == 0.0) return kInf;
        h += v * std::log(v / q);
    }
    return h;
}

// I_2 on the reshuffled representation. Checks run natively on omega; the
// entropy accumulates over atoms ordered by their unreshuffled keys so that
// eval_I2(reshuffle(nu)) reproduces eval_I1(nu) bit for bit.
inline double eval_I2(const ReshuffledMeasure& omega, const Kernel& K, double tol,
                      MarginalMode mode = MarginalMode::colors) {
    omega.require_probability(1e-9);
    const std::size_t m = K.sigma.size();
    for (const auto& [atom, v] : omega.atoms) {
        detail::require_inside_box(Ball(atom.colors.first, atom.degrees.first), K);
        detail::require_inside_box(Ball(atom.colors.second, atom.degrees.second), K);
    }
    // Flow symmetry per coordinate, straight from the grouped atoms.
    for (int i = 0; i < 2; ++i) {
        std::vector<double> flow(m * m, 0.0);
        for (const auto& [atom, v] : omega.atoms) {
            const auto a = static_cast<std::size_t>(i == 0 ? atom.colors.first
                                                           : atom.colors.second);
            const DegreeVector& deg = i == 0 ? atom.degrees.first : atom.degrees.second;
            for (std::size_t b = 0; b < m; ++b) flow[a * m + b] += v * deg.counts[b];
        }
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = a + 1; b < m; ++b) {
                if (std::abs(flow[a * m + b] - flow[b * m + a]) > tol) return kInf;
            }
        }
    }
    if (mode == MarginalMode::colors) {
        std::vector<double> mass1(m, 0.0);
        std::vector<double> mass2(m, 0.0);
        for (const auto& [atom, v] : omega.atoms) {
            mass1[static_cast<std::size_t>(atom.colors.first)] += v;
            mass2[static_cast<std::size_t>(atom.colors.second)] += v;
        }
        if (detail::color_marginal_gap(mass1, K.sigma) > tol) return kInf;
        if (detail::color_marginal_gap(mass2, K.sigma) > tol) return kInf;
    } else {
        const BallMeasure ref = kernel_measure(K);
        BallMeasure m1, m2;
        for (const auto& [atom, v] : omega.atoms) {
            m1.add(Ball(atom.colors.first, atom.degrees.first), v);
            m2.add(Ball(atom.colors.second, atom.degrees.second), v);
        }
        if (total_variation(m1, ref) > tol) return kInf;
        if (total_variation(m2, ref) > tol) return kInf;
    }
    std::vector<std::pair<std::pair<Ball, Ball>, double>> terms;
    terms.reserve(omega.atoms.size());
    for (const auto& [atom, v] : omega.atoms) terms.emplace_back(unreshuffle_atom(atom), v);
    std::sort(terms.begin(), terms.end(),
              [](const auto& lhs, const auto& rhs) { return lhs.first < rhs.first; });
    double h = 0.0;
    for (const auto& [pair, v] : terms) {
        if (v == 0.0) continue;
        const double q = K.prob(pair.first) * K.prob(pair.second);
        if (q == 0.0) return kInf;
        h += v * std::log(v / q);
    }
    return h;
}

}  // namespace graphrd
