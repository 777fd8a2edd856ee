#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace forkjoin::num {

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

double erf(double x);
double erfc(double x);

/// log(erfc(x)), stable for large positive x (uses the asymptotic expansion
/// of the scaled complementary error function once erfc underflows).
double log_erfc(double x);

double normal_pdf(double x);
double normal_cdf(double x);
/// Upper tail P(Z > x) for Z ~ N(0,1).
double normal_tail(double x);
/// log of the upper tail, stable far into the tail.
double log_normal_tail(double x);

/// Inverse of normal_cdf on (0,1). Wichura's PPND16 rational approximation,
/// absolute error below 1e-15 over the full open interval.
double inverse_normal_cdf(double p);

// ---------------------------------------------------------------------------
// Adaptive quadrature
// ---------------------------------------------------------------------------

struct QuadratureOptions {
    double tol_abs = 1e-9;
    double tol_rel = 1e-8;
    int max_depth = 48;
    // Optional interior split points; panels are refined independently so
    // seeding the locations of peaks keeps narrow features from being missed.
    std::vector<double> knots{};
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
};

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Integrand = std::function<double(double)>;

/// Adaptive Simpson rule on [a, b]. Throws QuadratureError if the refinement
/// depth is exhausted before the tolerance is met.
QuadratureResult integrate_finite(const Integrand& f, double a, double b,
                                  const QuadratureOptions& opts = {});

/// Integral over [a, inf), mapped onto a finite panel via x = a + tan(u).
QuadratureResult integrate_half_line(const Integrand& f, double a,
                                     const QuadratureOptions& opts = {});

/// Integral over the whole real line via x = tan(u).
QuadratureResult integrate_real_line(const Integrand& f,
                                     const QuadratureOptions& opts = {});

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

/// Counter-based splittable random stream. A draw is a pure function of
/// (master_seed, stream_index, counter), so any replication's stream can be
/// opened directly without generating its predecessors, and the sequence for
/// a given (seed, index) pair is identical on every platform.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

    std::uint64_t draw_at(std::uint64_t counter) const;
    double uniform_at(std::uint64_t counter) const;   // strictly inside (0,1)
    double gaussian_at(std::uint64_t counter) const;  // N(0,1) via inverse CDF

    std::uint64_t next_u64() { return draw_at(counter_++); }
    double next_uniform() { return uniform_at(counter_++); }
    double next_gaussian() { return gaussian_at(counter_++); }

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_index() const { return stream_index_; }

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

/// One standard normal draw from the stream's running counter.
inline double gaussian_sample(RngStream& stream) { return stream.next_gaussian(); }

// ---------------------------------------------------------------------------
// Summary statistics
// ---------------------------------------------------------------------------

struct SummaryStats {
    long long n = 0;
    double mean = 0.0;
    double stderr_ = 0.0;
    double ci_low = 0.0;   // 95% normal-approximation interval
    double ci_high = 0.0;
};

/// Compensated (Neumaier) summation in index order; the result does not
/// depend on how the input was produced or partitioned across workers.
double neumaier_sum(std::span<const double> xs);

/// Mean, standard error sd/sqrt(n) and 95% CI. Throws std::invalid_argument
/// on an empty sample.
SummaryStats summarize(std::span<const double> xs);

}  // namespace forkjoin::num
