#include "forkjoin/model.hpp"

#include <cmath>
#include <stdexcept>

#include "forkjoin/numerics.hpp"

namespace forkjoin::model {

void validate(const ModelParams& p) {
    if (!(p.sigma > 0.0)) throw std::domain_error("model: sigma must be positive");
    if (!(p.sigma_a > 0.0)) throw std::domain_error("model: sigma_a must be positive");
    if (!(p.beta > 0.0)) throw std::domain_error("model: beta must be positive");
    if (p.n_queues < 1) throw std::domain_error("model: n_queues must be at least 1");
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::Subcritical: return "subcritical";
        case Regime::Critical: return "critical";
        case Regime::Supercritical: return "supercritical";
    }
    return "?";
}

double lambda_of(const ModelParams& p, double a) {
    return 1.0 - p.sigma / std::sqrt(2.0 * a * p.beta + p.sigma * p.sigma);
}

double a_star_of(const ModelParams& p) {
    const double sa2 = p.sigma_a * p.sigma_a;
    return sa2 * sa2 / (p.sigma * p.sigma * 2.0 * p.beta) + sa2 / p.beta;
}

RegimeConstants derived_constants(const ModelParams& p, double a, bool force_critical) {
    validate(p);
    if (!(a >= 0.0)) throw std::domain_error("derived_constants: a must be nonnegative");

    RegimeConstants rc;
    rc.lambda = lambda_of(p, a);
    rc.one_minus_lambda = 1.0 - rc.lambda;
    rc.a_star = a_star_of(p);
    if (force_critical || std::fabs(a - rc.a_star) <= kRegimeTolerance * rc.a_star)
        rc.regime = Regime::Critical;
    else
        rc.regime = (a < rc.a_star) ? Regime::Subcritical : Regime::Supercritical;
    return rc;
}

double gamma_branch_arrival(const ModelParams& p, double a) {
    const double s = std::sqrt(2.0 * a * p.beta + p.sigma * p.sigma);
    return (2.0 * a * p.beta + 2.0 * p.sigma * p.sigma - 2.0 * p.sigma * s) /
           (p.sigma_a * p.sigma_a);
}

double gamma_branch_independent(const ModelParams& p, double a) {
    return (2.0 * a * p.beta - p.sigma_a * p.sigma_a) /
           (p.sigma * p.sigma + p.sigma_a * p.sigma_a);
}

double gamma_exponent(const ModelParams& p, double a) {
    validate(p);
    if (!(a > 0.0)) throw std::domain_error("gamma_exponent: a must be positive");
    return (a < a_star_of(p)) ? gamma_branch_arrival(p, a) : gamma_branch_independent(p, a);
}

LevelSchedule level_schedule(const ModelParams& p, double a, double k) {
    validate(p);
    if (!(a > 0.0)) throw std::domain_error("level_schedule: a must be positive");
    if (p.n_queues < 2) throw std::domain_error("level_schedule: n_queues must be at least 2");

    const double log_n = std::log(static_cast<double>(p.n_queues));
    LevelSchedule ls;
    ls.k = k;
    ls.f_n = (p.sigma * p.sigma / (2.0 * p.beta) + a) * log_n;
    ls.t_n = ls.f_n / p.beta + k * std::sqrt(log_n);
    const double loglog = std::log(log_n);
    ls.r_n = (loglog > 0.0)
                 ? p.sigma * std::sqrt(2.0 * a * p.beta + p.sigma * p.sigma) /
                       (4.0 * p.beta) * loglog
                 : 0.0;
    return ls;
}

double sup_tail_exponential(double vol, double nu, double x) {
    if (!(vol > 0.0)) throw std::domain_error("sup_tail_exponential: vol must be positive");
    if (!(x >= 0.0)) throw std::domain_error("sup_tail_exponential: x must be nonnegative");
    if (!(nu < 0.0))
        throw std::domain_error("sup_tail_exponential: drift must be negative (tail is 1 otherwise)");
    return std::exp(2.0 * nu * x / (vol * vol));
}

double clt_tail(const ModelParams& p, double x) {
    validate(p);
    return num::normal_tail(x * std::sqrt(2.0) * p.beta / (p.sigma * p.sigma_a));
}

double moderate_scaling(const ModelParams& p, double x) {
    validate(p);
    return x * x * p.beta * p.beta / (p.sigma * p.sigma * p.sigma_a * p.sigma_a);
}

double moderate_scaling_finite_n(const ModelParams& p, double x, double n_queues) {
    validate(p);
    if (!(n_queues > 1.0))
        throw std::domain_error("moderate_scaling_finite_n: need n_queues > 1");
    if (x == 0.0) return 0.0;
    const double log_n = std::log(n_queues);
    const double a = std::fabs(x) / std::sqrt(log_n);
    return log_n * gamma_exponent(p, a);
}

}  // namespace forkjoin::model
