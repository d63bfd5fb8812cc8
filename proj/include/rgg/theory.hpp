#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rgg/density.hpp"

namespace rgg {

enum class Regime { Subexponential, Exponential, Superexponential, HeavyTail };
enum class Prediction { DisconnectedWhp, ConcentrationRegime, Untheorized };
enum class TailSide { Upper, Lower };

std::string to_string(Regime regime);
std::string to_string(Prediction prediction);

Regime regime_of(const DensitySpec& spec);

struct RadiusPair {
    double r0 = 0.0;
    double r1 = 0.0;
};

/// w(n) = sqrt(log log n), the slowly diverging correction in R^(1).
double w_of_n(double n);

/// R^(0) = psi^{-1}(log n) and
/// R^(1) = psi^{-1}(log n + (d-1) log psi^{-1}(log n) - log psi'(psi^{-1}(log n)) - w(n)).
RadiusPair light_tail_radii(const DensitySpec& spec, double n);

/// R^(0) = R^(1) = n^{1 / (alpha - d/2)}.
RadiusPair heavy_tail_radii(const DensitySpec& spec, double n);

/// Superexponential threshold log log n / psi'(psi^{-1}(log n)).
double tau(const DensitySpec& spec, double n);

/// Scale 1 / psi'(psi^{-1}(log n)) used by the exponential-regime condition.
double exp_scale(const DensitySpec& spec, double n);

/// H(x) = 1 - x + x log x, with H(0) = 1.
double chernoff_h(double x);

/// exp(-n H(k / n)): bound on P(N >= k) (Upper, k >= n) or P(N <= k) (Lower, k <= n).
double poisson_tail_bound(double n, double k, TailSide side);

/// Expected number of isolated vertices within B(0, R), via the Mecke formula
/// n * int_{B(0,R)} q(y) exp(-n nu(B(y, r))) dy.
double expected_isolated(const DensitySpec& spec, double n, double r, double R);

/// P(no point of P_n beyond radius R) = exp(-n nu(B(0,R)^c)).
double tail_empty_prob(const DensitySpec& spec, double n, double R);

struct ConcentrationRadii {
    double r0 = 0.0;
    double r1 = 0.0;
    double a_n = 0.0;
    double b_n = 0.0;
    double delta = 0.0;
    /// psi'(psi^{-1}(log n)) * gamma * r <= 1, or A_n not positive.
    bool pre_asymptotic = false;
};

/// Radii R^(0) = psi^{-1}(A_n) and R^(1) = psi^{-1}(B_n) for the concentration
/// statement, with delta = log(3d / C) + 1.
ConcentrationRadii concentration_radii(const DensitySpec& spec, double n, double r, double gamma);

struct ClassifyOptions {
    double c_lo = 0.5;
    double c_hi = 2.0;
    double k_exp = 1.0;
};

struct ThresholdReport {
    std::string density;
    int dimension = 0;
    double n = 0.0;
    double r_n = 0.0;
    std::optional<double> gamma_n;
    Regime regime = Regime::HeavyTail;
    double r0 = 0.0;
    double r1 = 0.0;
    std::optional<double> tau;
    std::optional<double> w_n;
    /// r * psi'(psi^{-1}(log n)) for light tails.
    std::optional<double> scaled_radius;
    std::optional<double> a_n;
    std::optional<double> b_n;
    std::optional<double> concentration_r0;
    std::optional<double> concentration_r1;
    double expected_isolated = 0.0;
    double tail_empty_prob = 0.0;
    /// exp(-e^{w(n)}), the asymptotic form of tail_empty_prob at R^(1).
    std::optional<double> asymptotic_tail_empty;
    Prediction prediction = Prediction::Untheorized;
    ClassifyOptions options;
    /// PreAsymptotic, RadiusAboveOne, ...
    std::vector<std::string> flags;
};

ThresholdReport classify(const DensitySpec& spec, double n, double r, std::optional<double> gamma = std::nullopt,
                         const ClassifyOptions& options = {});

nlohmann::json to_json(const ThresholdReport& report);

/// Aligned two-column table.
std::string to_table(const ThresholdReport& report);

}  // namespace rgg
