#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "ivim/rng.hpp"

namespace ivim {

/// Measurement protocol: the ordered list of diffusion weightings (s/mm^2).
/// Canonicalized to non-decreasing order on construction. Repeated b-values
/// are allowed (protocols often average several b=0 acquisitions).
class AcquisitionScheme {
public:
    explicit AcquisitionScheme(std::vector<double> bvalues)
        : bvalues_(std::move(bvalues)) {
        std::sort(bvalues_.begin(), bvalues_.end());
        if (bvalues_.empty() || bvalues_.front() < 0.0)
            throw std::domain_error("AcquisitionScheme: b-values must be >= 0");
        if (bvalues_.front() != 0.0)
            throw std::domain_error("AcquisitionScheme: at least one b-value must be 0");
        std::set<double> distinct(bvalues_.begin(), bvalues_.end());
        if (distinct.size() < 4)
            throw std::domain_error("AcquisitionScheme: need at least 4 distinct b-values");
    }

    const std::vector<double>& bvalues() const { return bvalues_; }
    std::size_t size() const { return bvalues_.size(); }
    double operator[](std::size_t i) const { return bvalues_[i]; }

    std::size_t count_b0() const {
        return static_cast<std::size_t>(
            std::count(bvalues_.begin(), bvalues_.end(), 0.0));
    }

private:
    std::vector<double> bvalues_;
};

/// The four model parameters. Units: s0 in signal units, f dimensionless,
/// d_star and d in mm^2/s.
///
/// The identifiability ordering d_star > d is imposed by ParamBounds during
/// fitting (non-overlapping boxes), not validated here: the D*-fixed baseline
/// has to evaluate the forward model at a frozen d_star that may lie below d.
struct IvimParams {
    double s0 = 1.0;
    double f = 0.1;
    double d_star = 0.01;
    double d = 0.001;

    void validate() const {
        if (!(s0 > 0.0))
            throw std::domain_error("IvimParams: s0 must be > 0");
        if (!(f >= 0.0 && f <= 1.0))
            throw std::domain_error("IvimParams: f must be in [0, 1]");
        if (!(d > 0.0))
            throw std::domain_error("IvimParams: d must be > 0");
        if (!(d_star > 0.0))
            throw std::domain_error("IvimParams: d_star must be > 0");
    }

    std::array<double, 4> as_array() const { return {s0, f, d_star, d}; }
};

/// Box bounds for the four parameters. Defaults bracket standard tissue and
/// perfusion ranges; the gap between the d and d_star boxes prevents the two
/// compartments from swapping labels.
struct ParamBounds {
    IvimParams lower{1e-3, 0.0, 3e-3, 1e-4};
    IvimParams upper{1e5, 1.0, 1e-1, 2.9e-3};

    void validate() const {
        if (!(lower.s0 < upper.s0 && lower.f < upper.f &&
              lower.d_star < upper.d_star && lower.d < upper.d))
            throw std::domain_error("ParamBounds: lower must be < upper componentwise");
        if (lower.f < 0.0 || upper.f > 1.0)
            throw std::domain_error("ParamBounds: f bounds must lie within [0, 1]");
        if (lower.d_star < upper.d)
            throw std::domain_error(
                "ParamBounds: d_star lower bound must be >= d upper bound");
    }

    bool contains(const IvimParams& p) const {
        return p.s0 >= lower.s0 && p.s0 <= upper.s0 && p.f >= lower.f &&
               p.f <= upper.f && p.d_star >= lower.d_star &&
               p.d_star <= upper.d_star && p.d >= lower.d && p.d <= upper.d;
    }

    IvimParams clamp(IvimParams p) const {
        p.s0 = std::clamp(p.s0, lower.s0, upper.s0);
        p.f = std::clamp(p.f, lower.f, upper.f);
        p.d_star = std::clamp(p.d_star, lower.d_star, upper.d_star);
        p.d = std::clamp(p.d, lower.d, upper.d);
        return p;
    }
};

/// One voxel's signal vector, aligned sample-for-sample with a scheme.
struct DecayCurve {
    std::vector<double> signal;

    DecayCurve() = default;
    DecayCurve(std::vector<double> s, const AcquisitionScheme& scheme)
        : signal(std::move(s)) {
        if (signal.size() != scheme.size())
            throw std::domain_error("DecayCurve: length must equal scheme length");
        for (double v : signal)
            if (!std::isfinite(v))
                throw std::domain_error("DecayCurve: all values must be finite");
    }

    std::size_t size() const { return signal.size(); }
};

enum class NoiseKind { none, gaussian, rician };

/// snr is the amplitude ratio s0/sigma at b=0.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::none;
    double snr = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (kind != NoiseKind::none && !(snr > 0.0))
            throw std::domain_error("NoiseSpec: snr must be > 0 when noise is enabled");
    }
};

/// S(b) = S0 (f exp(-b D*) + (1-f) exp(-b D)) for every b in the scheme.
inline DecayCurve evaluate_signal(const IvimParams& p, const AcquisitionScheme& scheme) {
    p.validate();
    std::vector<double> s(scheme.size());
    for (std::size_t i = 0; i < scheme.size(); ++i) {
        const double b = scheme[i];
        s[i] = p.s0 * (p.f * std::exp(-b * p.d_star) +
                       (1.0 - p.f) * std::exp(-b * p.d));
    }
    DecayCurve c;
    c.signal = std::move(s);
    return c;
}

/// Analytic Jacobian of evaluate_signal, one row per b-value, columns in
/// parameter order (s0, f, d_star, d).
inline std::vector<std::array<double, 4>> jacobian(const IvimParams& p,
                                                   const AcquisitionScheme& scheme) {
    p.validate();
    std::vector<std::array<double, 4>> rows(scheme.size());
    for (std::size_t i = 0; i < scheme.size(); ++i) {
        const double b = scheme[i];
        const double ep = std::exp(-b * p.d_star); // perfusion atom
        const double ed = std::exp(-b * p.d);      // diffusion atom
        rows[i] = {p.f * ep + (1.0 - p.f) * ed,
                   p.s0 * (ep - ed),
                   -b * p.s0 * p.f * ep,
                   -b * p.s0 * (1.0 - p.f) * ed};
    }
    return rows;
}

/// Forward simulation. d_blood is an optional extra decay constant added to
/// d_star for simulation only; fitting always treats the combined rate as a
/// single D*.
inline DecayCurve simulate(const IvimParams& p, const AcquisitionScheme& scheme,
                           const NoiseSpec& noise, double d_blood = 0.0) {
    noise.validate();
    IvimParams q = p;
    q.d_star += d_blood;
    DecayCurve clean = evaluate_signal(q, scheme);
    if (noise.kind == NoiseKind::none)
        return clean;

    const double sigma = p.s0 / noise.snr;
    Rng rng(noise.seed);
    DecayCurve out = clean;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (noise.kind == NoiseKind::gaussian) {
            out.signal[i] += sigma * rng.normal();
        } else {
            const double n1 = sigma * rng.normal();
            const double n2 = sigma * rng.normal();
            out.signal[i] = std::hypot(out.signal[i] + n1, n2);
        }
    }
    return out;
}

} // namespace ivim
