#pragma once

// Scalar flux laws f(c) used for species input/output channels and for
// transport edges between compartments.  Coefficients are restricted to be
// non-negative so that every channel evaluates to a non-negative rate at any
// non-negative concentration; signed *net* fluxes are expressed as an
// input/output pair.

#include <string>
#include <vector>

namespace okin {

enum class FluxForm {
    Zero,        // f(c) = 0
    Constant,    // f(c) = p0
    Linear,      // f(c) = p0 * c
    Polynomial,  // f(c) = p0 + p1 c + p2 c^2 + ...
};

struct FluxFunction {
    FluxForm form = FluxForm::Zero;
    std::vector<double> params;

    double operator()(double c) const {
        switch (form) {
            case FluxForm::Zero: return 0.0;
            case FluxForm::Constant: return params[0];
            case FluxForm::Linear: return params[0] * c;
            case FluxForm::Polynomial: {
                double acc = 0.0;
                for (std::size_t i = params.size(); i-- > 0;) acc = acc * c + params[i];
                return acc;
            }
        }
        return 0.0;
    }

    bool is_zero() const {
        if (form == FluxForm::Zero) return true;
        for (double p : params)
            if (p != 0.0) return false;
        return true;
    }

    bool is_constant() const { return form == FluxForm::Zero || form == FluxForm::Constant; }

    double constant_value() const { return form == FluxForm::Zero ? 0.0 : params[0]; }

    // Flux scaled by a non-negative factor (used by transport sweeps).
    FluxFunction scaled(double s) const {
        FluxFunction f = *this;
        for (auto& p : f.params) p *= s;
        return f;
    }

    bool operator==(const FluxFunction&) const = default;

    static FluxFunction zero() { return {}; }
    static FluxFunction constant(double value) { return {FluxForm::Constant, {value}}; }
    static FluxFunction linear(double coeff) { return {FluxForm::Linear, {coeff}}; }
    static FluxFunction polynomial(std::vector<double> coeffs) {
        return {FluxForm::Polynomial, std::move(coeffs)};
    }
};

// Form name <-> enum, as spelled in model documents ("zero", "constant",
// "linear", "polynomial").  Parsing throws SchemaError on unknown names.
std::string to_string(FluxForm form);
FluxForm flux_form_from_string(const std::string& name);

// Checks coefficient count and non-negativity; throws ValidationError.
// `where` names the offending channel in the error message.
void validate_flux(const FluxFunction& f, const std::string& where);

}  // namespace okin
