#include "forkjoin/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace forkjoin::num {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;  // 1/sqrt(2 pi)
}  // namespace

double erf(double x) { return std::erf(x); }
double erfc(double x) { return std::erfc(x); }

double log_erfc(double x) {
    if (x < 25.0) return std::log(std::erfc(x));
    // erfc(x) = exp(-x^2)/(x sqrt(pi)) * (1 - 1/(2x^2) + 3/(4x^4) - 15/(8x^6) + ...)
    const double ix2 = 1.0 / (x * x);
    double series = 1.0, term = 1.0;
    for (int k = 1; k <= 6; ++k) {
        term *= -(2.0 * k - 1.0) * 0.5 * ix2;
        series += term;
    }
    return -x * x - std::log(x * std::sqrt(M_PI)) + std::log(series);
}

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }
double normal_tail(double x) { return 0.5 * std::erfc(x / kSqrt2); }
double log_normal_tail(double x) {
    if (x < 0.0) return std::log(normal_tail(x));
    return log_erfc(x / kSqrt2) - M_LN2;
}

// Wichura (1988), algorithm AS 241, PPND16.
double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inverse_normal_cdf: p must lie in (0,1)");
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                      2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                    3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                  4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
                (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                      1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                    6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                  2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                      1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                    2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                  5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
                (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                      1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                    1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                  5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -value : value;
}

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature
// ---------------------------------------------------------------------------

namespace {

struct SimpsonWorker {
    const Integrand* f;
    int max_depth;
    double error_sum = 0.0;

    double eval(double x) const {
        const double y = (*f)(x);
        return std::isfinite(y) ? y : 0.0;
    }

    // Classic recursion with Richardson correction; tol is split per half.
    double recurse(double a, double fa, double b, double fb, double m, double fm,
                   double whole, double tol, int depth) {
        const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        const double flm = eval(lm), frm = eval(rm);
        const double h6 = (b - a) / 12.0;
        const double left = h6 * (fa + 4.0 * flm + fm);
        const double right = h6 * (fm + 4.0 * frm + fb);
        const double delta = left + right - whole;
        if (std::fabs(delta) <= 15.0 * tol || std::fabs(delta) <= 1e-300) {
            error_sum += std::fabs(delta) / 15.0;
            return left + right + delta / 15.0;
        }
        if (depth >= max_depth)
            throw QuadratureError("adaptive Simpson: refinement depth exhausted");
        return recurse(a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1) +
               recurse(m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1);
    }

    double panel(double a, double b, double tol) {
        const double m = 0.5 * (a + b);
        const double fa = eval(a), fb = eval(b), fm = eval(m);
        const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        return recurse(a, fa, b, fb, m, fm, whole, tol, 0);
    }
};

QuadratureResult run_panels(const Integrand& f, std::vector<double> pts,
                            const QuadratureOptions& opts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    SimpsonWorker worker{&f, opts.max_depth};

    // First pass with the absolute tolerance to learn the magnitude, second
    // pass only if the relative tolerance asks for more than we achieved.
    const int panels = static_cast<int>(pts.size()) - 1;
    const double tol0 = opts.tol_abs / std::max(1, panels);
    double total = 0.0;
    for (int i = 0; i < panels; ++i) total += worker.panel(pts[i], pts[i + 1], tol0);

    const double want = opts.tol_rel * std::fabs(total);
    if (want > 0.0 && want < opts.tol_abs) {
        SimpsonWorker fine{&f, opts.max_depth};
        const double tol1 = want / std::max(1, panels);
        double refined = 0.0;
        for (int i = 0; i < panels; ++i) refined += fine.panel(pts[i], pts[i + 1], tol1);
        return {refined, fine.error_sum};
    }
    return {total, worker.error_sum};
}

}  // namespace

QuadratureResult integrate_finite(const Integrand& f, double a, double b,
                                  const QuadratureOptions& opts) {
    if (!(a < b)) throw std::invalid_argument("integrate_finite: need a < b");
    std::vector<double> pts{a, b};
    for (double k : opts.knots)
        if (k > a && k < b) pts.push_back(k);
    return run_panels(f, std::move(pts), opts);
}

QuadratureResult integrate_half_line(const Integrand& f, double a,
                                     const QuadratureOptions& opts) {
    auto g = [&f, a](double u) {
        const double t = std::tan(u);
        return f(a + t) * (1.0 + t * t);
    };
    std::vector<double> pts{0.0, std::atan(0.25), std::atan(1.0), std::atan(4.0),
                            std::atan(16.0), std::atan(64.0), std::atan(512.0), M_PI / 2};
    for (double k : opts.knots)
        if (k > a) pts.push_back(std::atan(k - a));
    return run_panels(g, std::move(pts), opts);
}

QuadratureResult integrate_real_line(const Integrand& f, const QuadratureOptions& opts) {
    auto g = [&f](double u) {
        const double t = std::tan(u);
        return f(t) * (1.0 + t * t);
    };
    std::vector<double> pts{-M_PI / 2, M_PI / 2};
    std::vector<double> ks = opts.knots;
    if (ks.empty()) ks = {0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 5.0, -5.0, 20.0, -20.0, 200.0, -200.0};
    for (double k : ks) pts.push_back(std::atan(k));
    return run_panels(g, std::move(pts), opts);
}

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}
}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_seed_(master_seed),
      stream_index_(stream_index),
      base_(mix64(mix64(master_seed ^ 0x6A09E667F3BCC909ull) + stream_index * kGamma)) {}

std::uint64_t RngStream::draw_at(std::uint64_t counter) const {
    return mix64(base_ + counter * kGamma);
}

double RngStream::uniform_at(std::uint64_t counter) const {
    return (static_cast<double>(draw_at(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::gaussian_at(std::uint64_t counter) const {
    return inverse_normal_cdf(uniform_at(counter));
}

// ---------------------------------------------------------------------------
// Summary statistics
// ---------------------------------------------------------------------------

double neumaier_sum(std::span<const double> xs) {
    double sum = 0.0, comp = 0.0;
    for (double x : xs) {
        const double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

SummaryStats summarize(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("summarize: empty sample");
    const auto n = static_cast<long long>(xs.size());
    const double mean = neumaier_sum(xs) / static_cast<double>(n);

    double se = 0.0;
    if (n > 1) {
        std::vector<double> sq(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double d = xs[i] - mean;
            sq[i] = d * d;
        }
        const double var = neumaier_sum(sq) / static_cast<double>(n - 1);
        se = std::sqrt(std::max(0.0, var) / static_cast<double>(n));
    }
    SummaryStats s;
    s.n = n;
    s.mean = mean;
    s.stderr_ = se;
    s.ci_low = mean - 1.96 * se;
    s.ci_high = mean + 1.96 * se;
    return s;
}

}  // namespace forkjoin::num
