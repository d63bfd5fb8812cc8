#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rgg {

struct HeavyTail {
    double alpha = 0.0;
};

/// q(x) = C exp(-psi(|x|)) with psi(z) = (z / scale)^v.
struct LightTail {
    double v = 0.0;
    double scale = 1.0;
};

using DensityFamily = std::variant<HeavyTail, LightTail>;

enum class TailClass { Heavy, Subexponential, Exponential, Superexponential };

std::string to_string(TailClass tail);

/// A radial probability density on R^d from one of the supported tail families.
///
/// Immutable once constructed; the normalising constant is fixed at construction
/// from the closed-form radial integral of the family.
class DensitySpec {
  public:
    DensitySpec(int dimension, DensityFamily family);

    static DensitySpec heavy_tail(int dimension, double alpha);
    static DensitySpec light_tail(int dimension, double v, double scale = 1.0);
    static DensitySpec gaussian(int dimension) { return light_tail(dimension, 2.0, 1.0); }

    /// Parse "gaussian", "exponential", "heavy:<alpha>" or "light:<v>[:<scale>]".
    static DensitySpec parse(int dimension, const std::string& text);

    int dimension() const { return dimension_; }
    const DensityFamily& family() const { return family_; }
    double norm_constant() const { return norm_constant_; }

    bool is_light() const { return std::holds_alternative<LightTail>(family_); }
    const LightTail& light() const;
    const HeavyTail& heavy() const;
    TailClass tail_class() const;

    /// Short identifier, the inverse of parse().
    std::string label() const;

    /// Radial profile q(radius).
    double profile(double radius) const;

    /// Radial marginal s_{d-1} rho^{d-1} q(rho); stable for very large rho.
    double radial_weight(double rho) const;

    /// Typical length scale of the radial law (1 for heavy tails).
    double length_scale() const;

    bool operator==(const DensitySpec& other) const;

  private:
    int dimension_;
    DensityFamily family_;
    double norm_constant_ = 0.0;
    double log_shell_constant_ = 0.0;  // log(s_{d-1} C)
};

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

/// Surface area of the unit sphere S^{d-1} in R^d.
double unit_sphere_area(int d);

/// Surface area of the spherical cap of half-angle theta on the unit sphere in R^d.
double cap_area(int d, double theta);

double eval_density(const DensitySpec& spec, double radius);

double psi(const DensitySpec& spec, double z);
double psi_prime(const DensitySpec& spec, double z);
double psi_inverse(const DensitySpec& spec, double y);

/// Inverse of an increasing function by bracketed bisection, relative tolerance 1e-12.
double invert_increasing(const std::function<double(double)>& f, double y, double lo = 0.0, double hi = 1.0);

/// nu(B(0, R)^c), by quadrature of the radial marginal.
double tail_mass(const DensitySpec& spec, double R);

/// nu(B(0, b)) - nu(B(0, a)) for 0 <= a <= b, by quadrature.
double shell_mass(const DensitySpec& spec, double a, double b);

/// Radial CDF nu(B(0, rho)) from the family's special-function closed form.
double radial_cdf(const DensitySpec& spec, double rho);

/// nu(B(y, r)) for any y with |y| = center_radius.
double ball_mass(const DensitySpec& spec, double center_radius, double r);

struct Box {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t dimension() const { return lower.size(); }
    double volume() const;
    bool contains(std::span<const double> x) const;
};

/// nu(box) by adaptive tensor-product Gauss-Legendre quadrature.
double cube_mass(const DensitySpec& spec, const Box& box);

/// Tabulated radial law for inverse-CDF sampling.
///
/// Nodes run from 0 to a truncation radius beyond which the tail mass is below
/// 1e-10 / max_intensity. Cumulative and survival masses are both kept so that
/// inversion retains full relative precision at either end.
class RadialMeasure {
  public:
    RadialMeasure(DensitySpec spec, double max_intensity);

    const DensitySpec& spec() const { return spec_; }
    double max_intensity() const { return max_intensity_; }
    double truncation_radius() const { return radii_.back(); }
    /// Mass beyond the truncation radius, i.e. the sampling bias bound.
    double truncated_mass() const { return survival_.back(); }

    std::span<const double> radii() const { return radii_; }
    std::span<const double> cumulative() const { return cumulative_; }

    /// Radius whose cumulative mass is u, for u in (0, 1). Values landing in the
    /// truncated tail are clamped to the truncation radius and reported via
    /// `truncated`.
    double quantile(double u, bool* truncated = nullptr) const;

  private:
    double solve_in_interval(std::size_t k, double partial_mass) const;

    DensitySpec spec_;
    double max_intensity_;
    std::vector<double> radii_;
    std::vector<double> cumulative_;
    std::vector<double> survival_;
    std::vector<double> node_weights_;
};

}  // namespace rgg
