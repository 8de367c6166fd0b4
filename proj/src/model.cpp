#include "okin/model.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "okin/errors.hpp"

namespace okin {

using nlohmann::json;

std::vector<int> ReactionSpec::substrates() const {
    std::vector<int> out;
    for (std::size_t j = 0; j < stoich.size(); ++j)
        for (int k = 0; k < -stoich[j]; ++k) out.push_back(static_cast<int>(j));
    return out;
}

std::vector<int> ReactionSpec::products() const {
    std::vector<int> out;
    for (std::size_t j = 0; j < stoich.size(); ++j)
        for (int k = 0; k < stoich[j]; ++k) out.push_back(static_cast<int>(j));
    return out;
}

int ReactionSpec::order() const {
    int m = 0;
    for (int nu : stoich)
        if (nu < 0) m -= nu;
    return m;
}

int NetworkModel::species_index(const std::string& name) const {
    for (std::size_t j = 0; j < species.size(); ++j)
        if (species[j].name == name) return static_cast<int>(j);
    return -1;
}

bool NetworkModel::is_closed() const {
    for (const auto& ch : io)
        if (!ch.is_zero()) return false;
    return true;
}

namespace {

void check_finite(double x, const std::string& what) {
    if (!std::isfinite(x)) throw ValidationError(what + " must be finite");
}

void check_positive(double x, const std::string& what) {
    check_finite(x, what);
    if (!(x > 0.0)) throw ValidationError(what + " must be positive");
}

void check_nonnegative(double x, const std::string& what) {
    check_finite(x, what);
    if (x < 0.0) throw ValidationError(what + " must be non-negative");
}

}  // namespace

void NetworkModel::validate() const {
    const int J = species_count();
    if (J == 0) throw ValidationError("model needs at least one species");
    if (io.size() != species.size())
        throw ValidationError("io channel list must align with species");
    if (initial.size() != species.size())
        throw ValidationError("initial concentrations must align with species");

    std::set<std::string> seen;
    const std::size_t Q = species.front().atoms.size();
    for (const auto& sp : species) {
        if (sp.name.empty()) throw ValidationError("species name must be non-empty");
        if (!seen.insert(sp.name).second)
            throw ValidationError("duplicate species name '" + sp.name + "'");
        check_positive(sp.mass, "mass of species '" + sp.name + "'");
        check_nonnegative(sp.chem_energy, "chem_energy of species '" + sp.name + "'");
        if (sp.atoms.size() != Q)
            throw ValidationError("species '" + sp.name +
                                  "': atom vectors must all have the same length");
        for (long a : sp.atoms)
            if (a < 0)
                throw ValidationError("species '" + sp.name + "': negative atom count");
    }

    check_positive(beta, "beta");
    check_positive(volume, "volume");
    check_nonnegative(heat_rate, "heat_rate");
    check_nonnegative(scale_fast, "scale_fast");
    check_nonnegative(scale_bath, "scale_bath");
    for (int j = 0; j < J; ++j)
        check_nonnegative(initial[j], "initial concentration of '" + species[j].name + "'");

    for (int j = 0; j < J; ++j) {
        validate_flux(io[j].input, "input flux of '" + species[j].name + "'");
        validate_flux(io[j].output, "output flux of '" + species[j].name + "'");
    }

    for (std::size_t r = 0; r < reactions.size(); ++r) {
        const auto& rx = reactions[r];
        const std::string tag = "reaction " + std::to_string(r);
        if (rx.stoich.size() != species.size())
            throw ValidationError(tag + ": stoichiometry must cover every species");
        check_nonnegative(rx.rate_const, tag + ": rate_const");

        if (rx.kind == ReactionKind::FastElastic) {
            for (int nu : rx.stoich)
                if (nu != 0)
                    throw ValidationError(tag + ": elastic channel must not change species");
            if (!rx.split_params.empty())
                throw ValidationError(tag + ": elastic channel takes no split parameters");
            continue;
        }

        const int m = rx.order();
        const int mp = static_cast<int>(rx.products().size());
        if (m < 1 || m > 2)
            throw ValidationError(tag + ": reactions take one or two substrate particles");
        if (mp < 1 || mp > 2)
            throw ValidationError(tag + ": reactions make one or two product particles");

        if (!rx.split_params.empty()) {
            if (static_cast<int>(rx.split_params.size()) != mp)
                throw ValidationError(tag + ": split_params must have one weight per product");
            for (double p : rx.split_params)
                if (!(p > 0.0) || !std::isfinite(p))
                    throw ValidationError(tag + ": split_params must be positive");
        }

        for (std::size_t q = 0; q < Q; ++q) {
            long balance = 0;
            for (int j = 0; j < J; ++j) balance += rx.stoich[j] * species[j].atoms[q];
            if (balance != 0)
                throw ValidationError(tag + ": atom type " + std::to_string(q) +
                                      " is not conserved (balance " + std::to_string(balance) +
                                      ")");
        }
    }
}

ConservationMatrix conservation_matrix(const NetworkModel& model) {
    ConservationMatrix cm;
    cm.species = model.species_count();
    cm.atom_types = model.atom_type_count();
    cm.entries.reserve(static_cast<std::size_t>(cm.species) * cm.atom_types);
    for (const auto& sp : model.species)
        for (long a : sp.atoms) cm.entries.push_back(a);
    return cm;
}

std::vector<double> atom_totals(const NetworkModel& model, const std::vector<double>& x) {
    if (x.size() != model.species.size())
        throw DomainError("atom_totals: vector must align with species");
    const int Q = model.atom_type_count();
    std::vector<double> totals(static_cast<std::size_t>(Q), 0.0);
    for (int q = 0; q < Q; ++q)
        for (int j = 0; j < model.species_count(); ++j)
            totals[q] += static_cast<double>(model.species[j].atoms[q]) * x[j];
    return totals;
}

// ---------------------------------------------------------------------------
// JSON parsing
// ---------------------------------------------------------------------------

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                known = true;
                break;
            }
        if (!known) throw SchemaError(context + ": unknown key '" + it.key() + "'");
    }
}

const json& require(const json& obj, const char* key, const std::string& context) {
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(context + ": missing key '" + std::string(key) + "'");
    return *it;
}

double as_number(const json& v, const std::string& context) {
    if (!v.is_number()) throw SchemaError(context + ": expected a number");
    return v.get<double>();
}

double number_or(const json& obj, const char* key, double fallback, const std::string& context) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    return as_number(*it, context + "." + key);
}

long as_integer(const json& v, const std::string& context) {
    if (!v.is_number_integer()) throw SchemaError(context + ": expected an integer");
    return v.get<long>();
}

std::string as_string(const json& v, const std::string& context) {
    if (!v.is_string()) throw SchemaError(context + ": expected a string");
    return v.get<std::string>();
}

FluxFunction parse_flux(const json& v, const std::string& context) {
    if (!v.is_object()) throw SchemaError(context + ": expected a flux object");
    reject_unknown_keys(v, {"form", "params"}, context);
    FluxFunction f;
    f.form = flux_form_from_string(as_string(require(v, "form", context), context + ".form"));
    if (auto it = v.find("params"); it != v.end()) {
        if (!it->is_array()) throw SchemaError(context + ".params: expected an array");
        for (const auto& p : *it) f.params.push_back(as_number(p, context + ".params"));
    }
    return f;
}

json flux_to_json(const FluxFunction& f) {
    json v;
    v["form"] = to_string(f.form);
    if (!f.params.empty()) v["params"] = f.params;
    return v;
}

}  // namespace

NetworkModel parse_model(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("model document is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("model document must be a JSON object");

    reject_unknown_keys(doc,
                        {"species", "reactions", "io", "initial", "beta", "volume", "heat_rate",
                         "scale_fast", "scale_bath"},
                        "model");

    NetworkModel model;

    const json& species = require(doc, "species", "model");
    if (!species.is_array() || species.empty())
        throw SchemaError("model.species: expected a non-empty array");
    for (std::size_t j = 0; j < species.size(); ++j) {
        const std::string ctx = "species[" + std::to_string(j) + "]";
        const json& sj = species[j];
        if (!sj.is_object()) throw SchemaError(ctx + ": expected an object");
        reject_unknown_keys(sj, {"name", "mass", "chem_energy", "atoms"}, ctx);
        SpeciesSpec sp;
        sp.name = as_string(require(sj, "name", ctx), ctx + ".name");
        sp.mass = number_or(sj, "mass", 1.0, ctx);
        sp.chem_energy = number_or(sj, "chem_energy", 0.0, ctx);
        if (auto it = sj.find("atoms"); it != sj.end()) {
            if (!it->is_array()) throw SchemaError(ctx + ".atoms: expected an array");
            for (const auto& a : *it) sp.atoms.push_back(as_integer(a, ctx + ".atoms"));
        }
        model.species.push_back(std::move(sp));
    }

    const int J = model.species_count();
    model.io.resize(static_cast<std::size_t>(J));
    model.initial.assign(static_cast<std::size_t>(J), 0.0);

    if (auto it = doc.find("reactions"); it != doc.end()) {
        if (!it->is_array()) throw SchemaError("model.reactions: expected an array");
        for (std::size_t r = 0; r < it->size(); ++r) {
            const std::string ctx = "reactions[" + std::to_string(r) + "]";
            const json& rj = (*it)[r];
            if (!rj.is_object()) throw SchemaError(ctx + ": expected an object");
            reject_unknown_keys(rj, {"stoich", "rate_const", "kind", "split_params"}, ctx);
            ReactionSpec rx;
            rx.stoich.assign(static_cast<std::size_t>(J), 0);
            const json& st = require(rj, "stoich", ctx);
            if (!st.is_object()) throw SchemaError(ctx + ".stoich: expected an object");
            for (auto sit = st.begin(); sit != st.end(); ++sit) {
                const int j = model.species_index(sit.key());
                if (j < 0)
                    throw SchemaError(ctx + ".stoich: unknown species '" + sit.key() + "'");
                rx.stoich[static_cast<std::size_t>(j)] =
                    static_cast<int>(as_integer(sit.value(), ctx + ".stoich"));
            }
            rx.rate_const = as_number(require(rj, "rate_const", ctx), ctx + ".rate_const");
            if (auto kit = rj.find("kind"); kit != rj.end()) {
                const std::string kind = as_string(*kit, ctx + ".kind");
                if (kind == "slow")
                    rx.kind = ReactionKind::Slow;
                else if (kind == "fast_elastic")
                    rx.kind = ReactionKind::FastElastic;
                else
                    throw SchemaError(ctx + ".kind: unknown reaction kind '" + kind + "'");
            }
            if (auto pit = rj.find("split_params"); pit != rj.end()) {
                if (!pit->is_array()) throw SchemaError(ctx + ".split_params: expected an array");
                for (const auto& p : *pit)
                    rx.split_params.push_back(as_number(p, ctx + ".split_params"));
            }
            model.reactions.push_back(std::move(rx));
        }
    }

    if (auto it = doc.find("io"); it != doc.end()) {
        if (!it->is_object()) throw SchemaError("model.io: expected an object");
        for (auto iit = it->begin(); iit != it->end(); ++iit) {
            const int j = model.species_index(iit.key());
            if (j < 0) throw SchemaError("model.io: unknown species '" + iit.key() + "'");
            const std::string ctx = "io['" + iit.key() + "']";
            if (!iit->is_object()) throw SchemaError(ctx + ": expected an object");
            reject_unknown_keys(*iit, {"input", "output"}, ctx);
            if (auto fit = iit->find("input"); fit != iit->end())
                model.io[static_cast<std::size_t>(j)].input = parse_flux(*fit, ctx + ".input");
            if (auto fit = iit->find("output"); fit != iit->end())
                model.io[static_cast<std::size_t>(j)].output = parse_flux(*fit, ctx + ".output");
        }
    }

    if (auto it = doc.find("initial"); it != doc.end()) {
        if (!it->is_object()) throw SchemaError("model.initial: expected an object");
        for (auto iit = it->begin(); iit != it->end(); ++iit) {
            const int j = model.species_index(iit.key());
            if (j < 0) throw SchemaError("model.initial: unknown species '" + iit.key() + "'");
            model.initial[static_cast<std::size_t>(j)] =
                as_number(iit.value(), "initial['" + iit.key() + "']");
        }
    }

    model.beta = number_or(doc, "beta", 1.0, "model");
    model.volume = number_or(doc, "volume", 1.0, "model");
    model.heat_rate = number_or(doc, "heat_rate", 0.0, "model");
    model.scale_fast = number_or(doc, "scale_fast", 0.0, "model");
    model.scale_bath = number_or(doc, "scale_bath", 0.0, "model");

    model.validate();
    return model;
}

NetworkModel parse_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

std::string serialize_model(const NetworkModel& model, int indent) {
    json doc;
    for (const auto& sp : model.species) {
        json sj;
        sj["name"] = sp.name;
        sj["mass"] = sp.mass;
        sj["chem_energy"] = sp.chem_energy;
        if (!sp.atoms.empty()) sj["atoms"] = sp.atoms;
        doc["species"].push_back(std::move(sj));
    }
    doc["reactions"] = json::array();
    for (const auto& rx : model.reactions) {
        json rj;
        json st = json::object();
        for (std::size_t j = 0; j < rx.stoich.size(); ++j)
            if (rx.stoich[j] != 0) st[model.species[j].name] = rx.stoich[j];
        rj["stoich"] = std::move(st);
        rj["rate_const"] = rx.rate_const;
        rj["kind"] = rx.kind == ReactionKind::Slow ? "slow" : "fast_elastic";
        if (!rx.split_params.empty()) rj["split_params"] = rx.split_params;
        doc["reactions"].push_back(std::move(rj));
    }
    json io = json::object();
    for (int j = 0; j < model.species_count(); ++j) {
        const auto& ch = model.io[static_cast<std::size_t>(j)];
        if (ch.input.form == FluxForm::Zero && ch.output.form == FluxForm::Zero) continue;
        json cj;
        cj["input"] = flux_to_json(ch.input);
        cj["output"] = flux_to_json(ch.output);
        io[model.species[static_cast<std::size_t>(j)].name] = std::move(cj);
    }
    doc["io"] = std::move(io);
    json init = json::object();
    for (int j = 0; j < model.species_count(); ++j)
        init[model.species[static_cast<std::size_t>(j)].name] =
            model.initial[static_cast<std::size_t>(j)];
    doc["initial"] = std::move(init);
    doc["beta"] = model.beta;
    doc["volume"] = model.volume;
    doc["heat_rate"] = model.heat_rate;
    doc["scale_fast"] = model.scale_fast;
    doc["scale_bath"] = model.scale_bath;
    return doc.dump(indent);
}

}  // namespace okin
