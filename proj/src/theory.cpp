#include "rgg/theory.hpp"

#include <cmath>
#include <limits>
#include <cstdio>
#include <sstream>

#include "rgg/error.hpp"
#include "rgg/quadrature.hpp"
#include "rgg/serialize.hpp"

namespace rgg {

namespace {

void require_large_n(double n) {
    if (!(n >= 16.0) || !std::isfinite(n)) {
        throw UsageError("light-tail thresholds need n >= 16 (so that log log n > 0)");
    }
}

void require_superexponential(const DensitySpec& spec, const char* what) {
    if (!spec.is_light() || !(spec.light().v > 1.0)) {
        throw UsageError(std::string(what) + " is defined only for superexponential tails (v > 1)");
    }
}

// psi^{-1} extended by 0 on non-positive arguments.
double psi_inverse_or_zero(const DensitySpec& spec, double y) {
    return y > 0.0 ? psi_inverse(spec, y) : 0.0;
}

}  // namespace

std::string to_string(Regime regime) {
    switch (regime) {
        case Regime::Subexponential:
            return "Subexponential";
        case Regime::Exponential:
            return "Exponential";
        case Regime::Superexponential:
            return "Superexponential";
        case Regime::HeavyTail:
            return "HeavyTail";
    }
    return "Unknown";
}

std::string to_string(Prediction prediction) {
    switch (prediction) {
        case Prediction::DisconnectedWhp:
            return "DisconnectedWhp";
        case Prediction::ConcentrationRegime:
            return "ConcentrationRegime";
        case Prediction::Untheorized:
            return "Untheorized";
    }
    return "Unknown";
}

Regime regime_of(const DensitySpec& spec) {
    switch (spec.tail_class()) {
        case TailClass::Heavy:
            return Regime::HeavyTail;
        case TailClass::Subexponential:
            return Regime::Subexponential;
        case TailClass::Exponential:
            return Regime::Exponential;
        case TailClass::Superexponential:
            return Regime::Superexponential;
    }
    return Regime::HeavyTail;
}

double w_of_n(double n) {
    require_large_n(n);
    return std::sqrt(std::log(std::log(n)));
}

RadiusPair light_tail_radii(const DensitySpec& spec, double n) {
    require_large_n(n);
    const double log_n = std::log(n);
    const double r0 = psi_inverse(spec, log_n);
    const double d = spec.dimension();
    const double arg = log_n + (d - 1.0) * std::log(r0) - std::log(psi_prime(spec, r0)) - w_of_n(n);
    return {r0, psi_inverse_or_zero(spec, arg)};
}

RadiusPair heavy_tail_radii(const DensitySpec& spec, double n) {
    if (!(n > 0.0)) {
        throw UsageError("heavy_tail_radii requires n > 0");
    }
    const double alpha = spec.heavy().alpha;
    const double r = std::pow(n, 1.0 / (alpha - 0.5 * spec.dimension()));
    return {r, r};
}

double tau(const DensitySpec& spec, double n) {
    require_superexponential(spec, "tau");
    require_large_n(n);
    const double log_n = std::log(n);
    return std::log(log_n) / psi_prime(spec, psi_inverse(spec, log_n));
}

double exp_scale(const DensitySpec& spec, double n) {
    require_large_n(n);
    return 1.0 / psi_prime(spec, psi_inverse(spec, std::log(n)));
}

double chernoff_h(double x) {
    if (!(x >= 0.0)) {
        throw UsageError("chernoff_h requires x >= 0");
    }
    if (x == 0.0) {
        return 1.0;
    }
    return 1.0 - x + x * std::log(x);
}

double poisson_tail_bound(double n, double k, TailSide side) {
    if (!(n > 0.0) || !(k >= 0.0)) {
        throw UsageError("poisson_tail_bound requires n > 0 and k >= 0");
    }
    if (side == TailSide::Upper && k < n) {
        throw UsageError("upper Chernoff bound requires k >= n");
    }
    if (side == TailSide::Lower && k > n) {
        throw UsageError("lower Chernoff bound requires k <= n");
    }
    return std::exp(-n * chernoff_h(k / n));
}

double expected_isolated(const DensitySpec& spec, double n, double r, double R) {
    if (!(r > 0.0) || !(R > 0.0) || !(n >= 0.0)) {
        throw UsageError("expected_isolated requires n >= 0, r > 0 and R > 0");
    }
    if (n == 0.0) {
        return 0.0;
    }
    const auto integrand = [&](double rho) {
        const double w = spec.radial_weight(rho);
        if (w == 0.0) {
            return 0.0;
        }
        return w * std::exp(-n * ball_mass(spec, rho, r));
    };
    // Kinks where the probing ball starts to exclude the origin.
    std::vector<double> breaks{0.0};
    if (r < R) {
        breaks.push_back(r);
    }
    breaks.push_back(R);
    return n * quad::integrate_pieces(integrand, breaks, {1e-12, 1e-7}).value;
}

double tail_empty_prob(const DensitySpec& spec, double n, double R) {
    if (!(R >= 0.0)) {
        throw UsageError("tail_empty_prob requires R >= 0");
    }
    return std::exp(-n * tail_mass(spec, R));
}

ConcentrationRadii concentration_radii(const DensitySpec& spec, double n, double r, double gamma) {
    require_superexponential(spec, "concentration radii");
    require_large_n(n);
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw UsageError("gamma must lie in (0, 1)");
    }
    if (!(r > 0.0)) {
        throw UsageError("r must be positive");
    }
    const double d = spec.dimension();
    const double log_n = std::log(n);
    const double bulk = psi_inverse(spec, log_n);
    const double slope = psi_prime(spec, bulk);

    ConcentrationRadii out;
    out.delta = std::log(3.0 * d / spec.norm_constant()) + 1.0;
    out.pre_asymptotic = !(slope * gamma * r > 1.0);
    const double inner = std::log(bulk / (gamma * r));
    if (inner > 0.0) {
        out.a_n = log_n + d * std::log(r) + (d + 2.0) * std::log(gamma) - std::log(inner) - out.delta;
    } else {
        out.a_n = -std::numeric_limits<double>::infinity();
        out.pre_asymptotic = true;
    }
    out.b_n = log_n + (d - 1.0) * std::log(bulk) - std::log(slope) + std::log(log_n);
    out.r0 = psi_inverse_or_zero(spec, out.a_n);
    out.r1 = psi_inverse_or_zero(spec, out.b_n);
    if (!(out.a_n > 0.0)) {
        out.pre_asymptotic = true;
    }
    return out;
}

ThresholdReport classify(const DensitySpec& spec, double n, double r, std::optional<double> gamma,
                         const ClassifyOptions& options) {
    if (!(r > 0.0)) {
        throw UsageError("r must be positive");
    }
    ThresholdReport rep;
    rep.density = spec.label();
    rep.dimension = spec.dimension();
    rep.n = n;
    rep.r_n = r;
    rep.gamma_n = gamma;
    rep.regime = regime_of(spec);
    rep.options = options;
    if (r > 1.0) {
        rep.flags.emplace_back("RadiusAboveOne");
    }

    if (rep.regime == Regime::HeavyTail) {
        const auto radii = heavy_tail_radii(spec, n);
        rep.r0 = radii.r0;
        rep.r1 = radii.r1;
        rep.prediction = Prediction::DisconnectedWhp;
    } else {
        const auto radii = light_tail_radii(spec, n);
        rep.r0 = radii.r0;
        rep.r1 = radii.r1;
        rep.w_n = w_of_n(n);
        rep.asymptotic_tail_empty = std::exp(-std::exp(*rep.w_n));
        rep.scaled_radius = r / exp_scale(spec, n);
        if (rep.r0 > rep.r1) {
            rep.flags.emplace_back("PreAsymptotic");
        }
        switch (rep.regime) {
            case Regime::Subexponential:
                rep.prediction = Prediction::DisconnectedWhp;
                break;
            case Regime::Exponential:
                rep.prediction =
                    *rep.scaled_radius <= options.k_exp ? Prediction::DisconnectedWhp : Prediction::Untheorized;
                break;
            default: {
                rep.tau = tau(spec, n);
                if (r < options.c_lo * *rep.tau) {
                    rep.prediction = Prediction::DisconnectedWhp;
                } else if (r > options.c_hi * *rep.tau) {
                    rep.prediction = Prediction::ConcentrationRegime;
                } else {
                    rep.prediction = Prediction::Untheorized;
                }
                if (gamma) {
                    const auto conc = concentration_radii(spec, n, r, *gamma);
                    rep.a_n = conc.a_n;
                    rep.b_n = conc.b_n;
                    rep.concentration_r0 = conc.r0;
                    rep.concentration_r1 = conc.r1;
                    if (conc.pre_asymptotic) {
                        rep.flags.emplace_back("ConcentrationPreAsymptotic");
                    }
                }
                break;
            }
        }
    }
    rep.expected_isolated = expected_isolated(spec, n, std::min(r, 1.0), rep.r0);
    rep.tail_empty_prob = tail_empty_prob(spec, n, rep.r1);
    return rep;
}

nlohmann::json to_json(const ThresholdReport& rep) {
    nlohmann::json j;
    j["density"] = rep.density;
    j["dimension"] = rep.dimension;
    j["n"] = rep.n;
    j["r_n"] = rep.r_n;
    const auto put = [&j](const char* key, const std::optional<double>& value) {
        j[key] = value ? nlohmann::json(*value) : nlohmann::json(nullptr);
    };
    put("gamma_n", rep.gamma_n);
    j["regime"] = to_string(rep.regime);
    j["r0"] = rep.r0;
    j["r1"] = rep.r1;
    put("tau", rep.tau);
    put("w_n", rep.w_n);
    put("scaled_radius", rep.scaled_radius);
    put("a_n", rep.a_n);
    put("b_n", rep.b_n);
    put("concentration_r0", rep.concentration_r0);
    put("concentration_r1", rep.concentration_r1);
    j["expected_isolated"] = rep.expected_isolated;
    j["tail_empty_prob"] = rep.tail_empty_prob;
    put("asymptotic_tail_empty", rep.asymptotic_tail_empty);
    j["prediction"] = to_string(rep.prediction);
    j["options"] = {{"c_lo", rep.options.c_lo}, {"c_hi", rep.options.c_hi}, {"k_exp", rep.options.k_exp}};
    j["flags"] = rep.flags;
    return j;
}

std::string to_table(const ThresholdReport& rep) {
    std::ostringstream out;
    char buf[64];
    const auto row = [&](const std::string& key, const std::string& value) {
        std::snprintf(buf, sizeof buf, "%-22s ", key.c_str());
        out << buf << value << '\n';
    };
    const auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.10g", x);
        return std::string(buf);
    };
    const auto opt = [&](const std::optional<double>& x) { return x ? num(*x) : std::string("-"); };
    row("density", rep.density);
    row("dimension", std::to_string(rep.dimension));
    row("n", num(rep.n));
    row("r_n", num(rep.r_n));
    row("gamma_n", opt(rep.gamma_n));
    row("regime", to_string(rep.regime));
    row("r0", num(rep.r0));
    row("r1", num(rep.r1));
    row("tau", opt(rep.tau));
    row("w_n", opt(rep.w_n));
    row("r*psi'(psi^-1(log n))", opt(rep.scaled_radius));
    row("A_n", opt(rep.a_n));
    row("B_n", opt(rep.b_n));
    row("concentration_r0", opt(rep.concentration_r0));
    row("concentration_r1", opt(rep.concentration_r1));
    row("expected_isolated", num(rep.expected_isolated));
    row("tail_empty_prob", num(rep.tail_empty_prob));
    row("asymptotic_tail_empty", opt(rep.asymptotic_tail_empty));
    row("prediction", to_string(rep.prediction));
    row("c_lo / c_hi / k_exp", num(rep.options.c_lo) + " / " + num(rep.options.c_hi) + " / " + num(rep.options.k_exp));
    std::string flags;
    for (const auto& f : rep.flags) {
        flags += (flags.empty() ? "" : ",") + f;
    }
    row("flags", flags.empty() ? "-" : flags);
    return out.str();
}

}  // namespace rgg
