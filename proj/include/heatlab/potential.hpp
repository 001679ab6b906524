#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "heatlab/mesh.hpp"

namespace heatlab {

/// Norm bundle entering the bound formulas: sup = ||V||_inf,
/// grad_sup = ||V_x||_inf, dt_sup = ||V_t||_inf, neg_sup = ||min{V,0}||_inf,
/// triple = sup^{1/2} + grad_sup^{1/2} + dt_sup^{1/3}.
struct PotentialNorms {
    double sup = 0.0;
    double grad_sup = 0.0;
    double dt_sup = 0.0;
    double neg_sup = 0.0;
    double triple = 0.0;
    bool approximate = false;  // derivatives came from finite differences

    static PotentialNorms from_components(double sup, double grad, double dt,
                                          double neg, bool approx = false);
};

/// Evaluable potential family V(x, t). Immutable; evaluation is pure.
class Potential {
public:
    enum class Kind { Constant, TimeIndependent, Separable, Sampled };

    static Potential constant(double c);
    static Potential time_independent(std::function<double(double)> v,
                                      std::function<double(double)> dv = {});
    static Potential separable(std::function<double(double)> v0,
                               std::function<double(double)> dv0,
                               std::function<double(double)> g,
                               std::function<double(double)> dg);
    /// V0 = amplitude * sin(frequency * pi * x_hat) with x_hat = (x-a)/(b-a),
    /// g = (1+t)^beta. Carries closed-form norms.
    static Potential sine_poly(double amplitude, int frequency, double beta,
                               double a, double b, double T);
    /// Values stored directly at interior nodes x half-steps (row-major,
    /// values[step * n + i]); evaluation elsewhere snaps to the nearest sample.
    static Potential sampled(const SpaceGrid& grid, const TimeGrid& tg,
                             std::vector<double> midstep_values);

    double operator()(double x, double t) const { return eval_(x, t); }
    Kind kind() const { return kind_; }
    bool time_independent_kind() const {
        return kind_ == Kind::Constant || kind_ == Kind::TimeIndependent;
    }
    const std::optional<PotentialNorms>& closed_form_norms() const {
        return closed_form_;
    }

private:
    Potential() = default;
    Kind kind_ = Kind::Constant;
    std::function<double(double, double)> eval_;
    std::function<double(double, double)> dx_;   // analytic, may be empty
    std::function<double(double, double)> dt_;   // analytic, may be empty
    std::optional<PotentialNorms> closed_form_;

    friend PotentialNorms norms(const Potential&, const SpaceGrid&,
                                const TimeGrid&, int);
};

/// Norm bundle: closed forms when the family carries them, otherwise suprema
/// over an oversampled tensor grid with finite-difference derivatives.
PotentialNorms norms(const Potential& V, const SpaceGrid& grid,
                     const TimeGrid& tg, int oversample = 8);

/// V(x_i, t_{n+1/2}) as a row-major (steps x n) array feeding the stepper.
std::vector<double> evaluate_midstep(const Potential& V, const SpaceGrid& grid,
                                     const TimeGrid& tg);

} // namespace heatlab
