#include "okin/flux.hpp"

#include <cmath>

#include "okin/errors.hpp"

namespace okin {

std::string to_string(FluxForm form) {
    switch (form) {
        case FluxForm::Zero: return "zero";
        case FluxForm::Constant: return "constant";
        case FluxForm::Linear: return "linear";
        case FluxForm::Polynomial: return "polynomial";
    }
    return "zero";
}

FluxForm flux_form_from_string(const std::string& name) {
    if (name == "zero") return FluxForm::Zero;
    if (name == "constant") return FluxForm::Constant;
    if (name == "linear") return FluxForm::Linear;
    if (name == "polynomial") return FluxForm::Polynomial;
    throw SchemaError("unknown flux form '" + name + "'");
}

void validate_flux(const FluxFunction& f, const std::string& where) {
    const std::size_t n = f.params.size();
    switch (f.form) {
        case FluxForm::Zero:
            if (n != 0) throw ValidationError(where + ": zero flux takes no parameters");
            break;
        case FluxForm::Constant:
            if (n != 1) throw ValidationError(where + ": constant flux takes one parameter");
            break;
        case FluxForm::Linear:
            if (n != 1) throw ValidationError(where + ": linear flux takes one parameter");
            break;
        case FluxForm::Polynomial:
            if (n == 0) throw ValidationError(where + ": polynomial flux needs coefficients");
            break;
    }
    for (double p : f.params) {
        if (!std::isfinite(p)) throw ValidationError(where + ": non-finite flux parameter");
        if (p < 0.0) throw ValidationError(where + ": negative flux parameter");
    }
}

}  // namespace okin
