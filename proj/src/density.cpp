#include "rgg/density.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "rgg/error.hpp"
#include "rgg/quadrature.hpp"

namespace rgg {

namespace {

constexpr double kPi = std::numbers::pi;

std::string shortest(double x) {
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), end);
}

double parse_number(const std::string& text, const std::string& context) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw UsageError("cannot parse number '" + text + "' in " + context);
    }
    return value;
}

}  // namespace

std::string to_string(TailClass tail) {
    switch (tail) {
        case TailClass::Heavy:
            return "heavy";
        case TailClass::Subexponential:
            return "subexponential";
        case TailClass::Exponential:
            return "exponential";
        case TailClass::Superexponential:
            return "superexponential";
    }
    return "unknown";
}

double unit_sphere_area(int d) {
    return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

double unit_ball_volume(int d) {
    return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

double cap_area(int d, double theta) {
    theta = std::clamp(theta, 0.0, kPi);
    switch (d) {
        case 2:
            return 2.0 * theta;
        case 3:
            return 2.0 * kPi * (1.0 - std::cos(theta));
        default:
            break;
    }
    // Fraction of S^{d-1} within angle theta of a pole is I_{sin^2}((d-1)/2, 1/2) / 2.
    const double a = 0.5 * (d - 1);
    const double total = unit_sphere_area(d);
    if (theta <= 0.5 * kPi) {
        const double s = std::sin(theta);
        return 0.5 * boost::math::ibeta(a, 0.5, s * s) * total;
    }
    const double s = std::sin(kPi - theta);
    return (1.0 - 0.5 * boost::math::ibeta(a, 0.5, s * s)) * total;
}

DensitySpec::DensitySpec(int dimension, DensityFamily family) : dimension_(dimension), family_(family) {
    if (dimension_ < 2) {
        throw UsageError("dimension must be >= 2, got " + std::to_string(dimension_));
    }
    const double d = dimension_;
    const double sphere = unit_sphere_area(dimension_);
    if (const auto* heavy = std::get_if<HeavyTail>(&family_)) {
        if (!std::isfinite(heavy->alpha) || !(heavy->alpha > d)) {
            throw UsageError("heavy tail requires alpha > d (alpha=" + shortest(heavy->alpha) +
                             ", d=" + std::to_string(dimension_) + ")");
        }
        // int_0^inf rho^{d-1} / (1 + rho^alpha) drho = pi / (alpha sin(pi d / alpha))
        const double radial = kPi / (heavy->alpha * std::sin(kPi * d / heavy->alpha));
        norm_constant_ = 1.0 / (sphere * radial);
    } else {
        const auto& light = std::get<LightTail>(family_);
        if (!std::isfinite(light.v) || !(light.v > 0.0)) {
            throw UsageError("light tail requires v > 0");
        }
        if (!std::isfinite(light.scale) || !(light.scale > 0.0)) {
            throw UsageError("light tail requires scale > 0");
        }
        // int_0^inf rho^{d-1} exp(-(rho/s)^v) drho = s^d Gamma(d/v) / v
        const double log_radial = d * std::log(light.scale) + std::lgamma(d / light.v) - std::log(light.v);
        norm_constant_ = std::exp(-log_radial) / sphere;
    }
    log_shell_constant_ = std::log(sphere * norm_constant_);
}

DensitySpec DensitySpec::heavy_tail(int dimension, double alpha) {
    return DensitySpec(dimension, HeavyTail{alpha});
}

DensitySpec DensitySpec::light_tail(int dimension, double v, double scale) {
    return DensitySpec(dimension, LightTail{v, scale});
}

DensitySpec DensitySpec::parse(int dimension, const std::string& text) {
    if (text == "gaussian") {
        return gaussian(dimension);
    }
    if (text == "exponential") {
        return light_tail(dimension, 1.0);
    }
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw UsageError("unknown density '" + text +
                         "' (expected gaussian, exponential, heavy:<alpha> or light:<v>[:<scale>])");
    }
    const std::string kind = text.substr(0, colon);
    const std::string rest = text.substr(colon + 1);
    if (kind == "heavy") {
        return heavy_tail(dimension, parse_number(rest, "density '" + text + "'"));
    }
    if (kind == "light") {
        const auto second = rest.find(':');
        if (second == std::string::npos) {
            return light_tail(dimension, parse_number(rest, "density '" + text + "'"));
        }
        return light_tail(dimension, parse_number(rest.substr(0, second), "density '" + text + "'"),
                          parse_number(rest.substr(second + 1), "density '" + text + "'"));
    }
    throw UsageError("unknown density kind '" + kind + "'");
}

const LightTail& DensitySpec::light() const {
    if (const auto* light = std::get_if<LightTail>(&family_)) {
        return *light;
    }
    throw UsageError("psi is undefined for heavy-tailed densities");
}

const HeavyTail& DensitySpec::heavy() const {
    if (const auto* heavy = std::get_if<HeavyTail>(&family_)) {
        return *heavy;
    }
    throw UsageError("density is not heavy-tailed");
}

TailClass DensitySpec::tail_class() const {
    if (!is_light()) {
        return TailClass::Heavy;
    }
    const double v = light().v;
    if (v < 1.0) {
        return TailClass::Subexponential;
    }
    if (v == 1.0) {
        return TailClass::Exponential;
    }
    return TailClass::Superexponential;
}

std::string DensitySpec::label() const {
    if (!is_light()) {
        return "heavy:" + shortest(heavy().alpha);
    }
    const auto& l = light();
    if (l.scale == 1.0 && l.v == 2.0) {
        return "gaussian";
    }
    if (l.scale == 1.0 && l.v == 1.0) {
        return "exponential";
    }
    if (l.scale == 1.0) {
        return "light:" + shortest(l.v);
    }
    return "light:" + shortest(l.v) + ":" + shortest(l.scale);
}

double DensitySpec::profile(double radius) const {
    if (const auto* heavy = std::get_if<HeavyTail>(&family_)) {
        return norm_constant_ / (1.0 + std::pow(radius, heavy->alpha));
    }
    const auto& l = std::get<LightTail>(family_);
    return norm_constant_ * std::exp(-std::pow(radius / l.scale, l.v));
}

double DensitySpec::radial_weight(double rho) const {
    if (rho <= 0.0) {
        return 0.0;
    }
    const double d = dimension_;
    const double log_rho = std::log(rho);
    const double log_prefactor = log_shell_constant_ + (d - 1.0) * log_rho;
    if (const auto* heavy = std::get_if<HeavyTail>(&family_)) {
        if (rho <= 1.0) {
            return std::exp(log_prefactor) / (1.0 + std::pow(rho, heavy->alpha));
        }
        return std::exp(log_prefactor - heavy->alpha * log_rho - std::log1p(std::exp(-heavy->alpha * log_rho)));
    }
    const auto& l = std::get<LightTail>(family_);
    return std::exp(log_prefactor - std::pow(rho / l.scale, l.v));
}

double DensitySpec::length_scale() const {
    return is_light() ? light().scale : 1.0;
}

bool DensitySpec::operator==(const DensitySpec& other) const {
    if (dimension_ != other.dimension_ || family_.index() != other.family_.index()) {
        return false;
    }
    if (is_light()) {
        return light().v == other.light().v && light().scale == other.light().scale;
    }
    return heavy().alpha == other.heavy().alpha;
}

double eval_density(const DensitySpec& spec, double radius) {
    return spec.profile(radius);
}

double psi(const DensitySpec& spec, double z) {
    const auto& l = spec.light();
    return std::pow(z / l.scale, l.v);
}

double psi_prime(const DensitySpec& spec, double z) {
    const auto& l = spec.light();
    return (l.v / l.scale) * std::pow(z / l.scale, l.v - 1.0);
}

double psi_inverse(const DensitySpec& spec, double y) {
    const auto& l = spec.light();
    if (!(y > 0.0)) {
        throw UsageError("psi_inverse requires a positive argument");
    }
    return l.scale * std::pow(y, 1.0 / l.v);
}

double invert_increasing(const std::function<double(double)>& f, double y, double lo, double hi) {
    if (!(lo < hi)) {
        throw UsageError("invert_increasing needs lo < hi");
    }
    for (int i = 0; f(hi) < y; ++i) {
        if (i > 2000 || !std::isfinite(hi)) {
            throw NumericFailure("invert_increasing: target not bracketed");
        }
        lo = hi;
        hi *= 2.0;
    }
    while (f(lo) > y) {
        if (lo <= 0.0) {
            return lo;
        }
        hi = lo;
        lo *= 0.5;
    }
    for (int i = 0; i < 2000; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= 1e-12 * std::abs(mid) || mid <= lo || mid >= hi) {
            return mid;
        }
        (f(mid) < y ? lo : hi) = mid;
    }
    throw NumericFailure("invert_increasing: bisection did not converge");
}

double tail_mass(const DensitySpec& spec, double R) {
    if (R < 0.0 || std::isnan(R)) {
        throw UsageError("tail_mass requires R >= 0");
    }
    if (std::isinf(R)) {
        return 0.0;
    }
    const auto weight = [&spec](double rho) { return spec.radial_weight(rho); };
    const auto result = quad::integrate_to_infinity(weight, R, {1e-10, 1e-10});
    return std::clamp(result.value, 0.0, 1.0);
}

double shell_mass(const DensitySpec& spec, double a, double b) {
    if (a < 0.0 || b < a) {
        throw UsageError("shell_mass requires 0 <= a <= b");
    }
    const auto weight = [&spec](double rho) { return spec.radial_weight(rho); };
    return quad::integrate(weight, a, b, {1e-12, 1e-12}).value;
}

double radial_cdf(const DensitySpec& spec, double rho) {
    if (rho <= 0.0) {
        return 0.0;
    }
    if (std::isinf(rho)) {
        return 1.0;
    }
    const double d = spec.dimension();
    if (spec.is_light()) {
        const auto& l = spec.light();
        return boost::math::gamma_p(d / l.v, std::pow(rho / l.scale, l.v));
    }
    // Substituting u = rho^a / (1 + rho^a) turns the radial integral into a
    // regularised incomplete beta with parameters (d/a, 1 - d/a).
    const double alpha = spec.heavy().alpha;
    const double a = d / alpha;
    const double b = 1.0 - a;
    const double log_power = alpha * std::log(rho);
    if (log_power < 0.0) {
        const double p = std::exp(log_power);
        return boost::math::ibeta(a, b, p / (1.0 + p));
    }
    const double complement = 1.0 / (1.0 + std::exp(log_power));
    return 1.0 - boost::math::ibeta(b, a, complement);
}

double ball_mass(const DensitySpec& spec, double center_radius, double r) {
    if (!(r > 0.0) || center_radius < 0.0) {
        throw UsageError("ball_mass requires r > 0 and center_radius >= 0");
    }
    const double rho = center_radius;
    if (rho == 0.0) {
        return shell_mass(spec, 0.0, r);
    }
    const int d = spec.dimension();
    const double sphere = unit_sphere_area(d);
    const double full_until = r - rho;  // shells of radius t <= r - rho lie inside the ball
    const auto cap_weight = [&](double t) {
        if (t <= 0.0) {
            return 0.0;
        }
        if (t <= full_until) {
            return spec.radial_weight(t);
        }
        const double cos_theta = std::clamp((t * t + rho * rho - r * r) / (2.0 * t * rho), -1.0, 1.0);
        return spec.radial_weight(t) * cap_area(d, std::acos(cos_theta)) / sphere;
    };
    double mass = 0.0;
    double lo = std::max(0.0, rho - r);
    if (full_until > 0.0) {
        mass += shell_mass(spec, 0.0, full_until);
        lo = full_until;
    }
    mass += quad::integrate(cap_weight, lo, rho + r, {1e-12, 1e-11}).value;
    return std::clamp(mass, 0.0, 1.0);
}

double Box::volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lower.size(); ++i) {
        v *= upper[i] - lower[i];
    }
    return v;
}

bool Box::contains(std::span<const double> x) const {
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (x[i] < lower[i] || x[i] > upper[i]) {
            return false;
        }
    }
    return true;
}

namespace {

// Tensor-product 8-point Gauss-Legendre estimate of nu(box).
double tensor_rule(const DensitySpec& spec, const Box& box) {
    static const quad::LegendreRule<8> rule;
    const std::size_t d = box.dimension();
    const std::size_t order = rule.nodes.size();
    std::vector<std::size_t> digit(d, 0);
    std::vector<double> half(d), mid(d);
    for (std::size_t i = 0; i < d; ++i) {
        half[i] = 0.5 * (box.upper[i] - box.lower[i]);
        mid[i] = 0.5 * (box.upper[i] + box.lower[i]);
    }
    double sum = 0.0;
    while (true) {
        double weight = 1.0;
        double norm2 = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double x = mid[i] + half[i] * rule.nodes[digit[i]];
            norm2 += x * x;
            weight *= rule.weights[digit[i]];
        }
        sum += weight * spec.profile(std::sqrt(norm2));
        std::size_t i = 0;
        while (i < d && ++digit[i] == order) {
            digit[i++] = 0;
        }
        if (i == d) {
            break;
        }
    }
    double jacobian = 1.0;
    for (double h : half) {
        jacobian *= h;
    }
    return sum * jacobian;
}

std::vector<Box> halve(const Box& box) {
    const std::size_t d = box.dimension();
    std::vector<Box> parts;
    parts.reserve(std::size_t{1} << d);
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
        Box part = box;
        for (std::size_t i = 0; i < d; ++i) {
            const double m = 0.5 * (box.lower[i] + box.upper[i]);
            if (mask & (std::size_t{1} << i)) {
                part.lower[i] = m;
            } else {
                part.upper[i] = m;
            }
        }
        parts.push_back(std::move(part));
    }
    return parts;
}

double adaptive_cube(const DensitySpec& spec, const Box& box, double coarse, int depth) {
    const auto parts = halve(box);
    std::vector<double> fine_parts;
    fine_parts.reserve(parts.size());
    double fine = 0.0;
    for (const auto& part : parts) {
        fine_parts.push_back(tensor_rule(spec, part));
        fine += fine_parts.back();
    }
    if (std::abs(fine - coarse) <= std::max(1e-14, 1e-9 * std::abs(fine))) {
        return fine;
    }
    if (depth >= 10) {
        throw NumericFailure("cube_mass did not converge");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        total += adaptive_cube(spec, parts[i], fine_parts[i], depth + 1);
    }
    return total;
}

}  // namespace

double cube_mass(const DensitySpec& spec, const Box& box) {
    if (box.lower.size() != static_cast<std::size_t>(spec.dimension()) || box.upper.size() != box.lower.size()) {
        throw UsageError("cube dimension does not match density dimension");
    }
    for (std::size_t i = 0; i < box.dimension(); ++i) {
        if (!(box.lower[i] < box.upper[i])) {
            throw UsageError("cube_mass requires a non-degenerate box");
        }
    }
    return std::clamp(adaptive_cube(spec, box, tensor_rule(spec, box), 0), 0.0, 1.0);
}

RadialMeasure::RadialMeasure(DensitySpec spec, double max_intensity)
    : spec_(std::move(spec)), max_intensity_(max_intensity) {
    if (!(max_intensity_ > 0.0)) {
        throw UsageError("RadialMeasure needs a positive maximum intensity");
    }
    const double length = spec_.length_scale();
    const double target = 1e-10 / std::max(1.0, max_intensity_);

    double truncation = length;
    double tail = tail_mass(spec_, truncation);
    for (int i = 0; tail >= target; ++i) {
        if (i > 1500) {
            throw NumericFailure("radial table: tail mass does not fall below " + std::to_string(target));
        }
        truncation *= 2.0;
        tail = tail_mass(spec_, truncation);
    }

    constexpr double kStep = 0.02;  // node spacing in log(1 + rho / length)
    const double span = std::log1p(truncation / length);
    const auto intervals = static_cast<std::size_t>(std::ceil(span / kStep));
    const double step = span / static_cast<double>(intervals);
    radii_.resize(intervals + 1);
    for (std::size_t k = 0; k <= intervals; ++k) {
        radii_[k] = length * std::expm1(step * static_cast<double>(k));
    }
    radii_.front() = 0.0;
    radii_.back() = truncation;

    const auto weight = [this](double rho) { return spec_.radial_weight(rho); };
    std::vector<double> pieces(intervals);
    for (std::size_t k = 0; k < intervals; ++k) {
        pieces[k] = quad::gauss_legendre<16>(weight, radii_[k], radii_[k + 1]);
    }
    cumulative_.assign(intervals + 1, 0.0);
    for (std::size_t k = 0; k < intervals; ++k) {
        cumulative_[k + 1] = cumulative_[k] + pieces[k];
    }
    node_weights_.resize(intervals + 1);
    std::transform(radii_.begin(), radii_.end(), node_weights_.begin(), weight);
    survival_.assign(intervals + 1, 0.0);
    survival_[intervals] = tail;
    for (std::size_t k = intervals; k-- > 0;) {
        survival_[k] = survival_[k + 1] + pieces[k];
    }
}

double RadialMeasure::solve_in_interval(std::size_t k, double partial_mass) const {
    const double a = radii_[k];
    const double b = radii_[k + 1];
    const auto weight = [this](double rho) { return spec_.radial_weight(rho); };
    const double interval_mass = survival_[k] - survival_[k + 1];
    if (partial_mass <= 0.0) {
        return a;
    }
    if (partial_mass >= interval_mass) {
        return b;
    }
    double lo = a;
    double hi = b;
    // Start from the root of the trapezoidal model of the weight on [a, b].
    const double wa = node_weights_[k];
    const double slope_ab = (node_weights_[k + 1] - wa) / (b - a);
    double x = a + (b - a) * (partial_mass / interval_mass);
    if (std::abs(slope_ab) * (b - a) > 1e-12 * wa) {
        const double disc = wa * wa + 2.0 * slope_ab * partial_mass;
        if (disc >= 0.0) {
            const double t = 2.0 * partial_mass / (wa + std::sqrt(disc));
            if (t > 0.0 && t < b - a) {
                x = a + t;
            }
        }
    } else if (wa > 0.0 && partial_mass / wa < b - a) {
        x = a + partial_mass / wa;
    }
    for (int iter = 0; iter < 100; ++iter) {
        const double g = quad::gauss_legendre<8>(weight, a, x) - partial_mass;
        (g > 0.0 ? hi : lo) = x;
        const double slope = weight(x);
        double next = slope > 0.0 ? x - g / slope : 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-12 * x || hi - lo <= 1e-12 * hi) {
            return std::clamp(next, lo, hi);
        }
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        x = next;
    }
    return x;
}

double RadialMeasure::quantile(double u, bool* truncated) const {
    if (truncated) {
        *truncated = false;
    }
    if (u <= 0.0) {
        return 0.0;
    }
    if (u <= 0.5) {
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        const auto k = static_cast<std::size_t>(std::distance(cumulative_.begin(), it)) - 1;
        if (k + 1 >= radii_.size()) {
            return radii_.back();
        }
        return solve_in_interval(k, u - cumulative_[k]);
    }
    const double s = 1.0 - u;
    // survival_ is decreasing: first index with survival < s.
    const auto it = std::partition_point(survival_.begin(), survival_.end(), [s](double x) { return x >= s; });
    const auto j = static_cast<std::size_t>(std::distance(survival_.begin(), it));
    if (j == survival_.size()) {
        if (truncated) {
            *truncated = true;
        }
        return radii_.back();
    }
    if (j == 0) {
        return 0.0;
    }
    const std::size_t k = j - 1;
    return solve_in_interval(k, survival_[k] - s);
}

}  // namespace rgg
