#include "walkcap/capacity/capacity.hpp"

#include <cmath>

namespace walkcap::capacity {

using nlohmann::json;

namespace {

bool is_fraction(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

void require_fraction(const std::string& field, double v) {
    if (!is_fraction(v)) throw ParameterError(field, "must be a fraction in [0, 1]");
}

void require_factors(const std::vector<CorrectiveFactor>& factors) {
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (!is_fraction(factors[i].value)) {
            const std::string name = factors[i].label.empty() ? std::to_string(i) : factors[i].label;
            throw ParameterError("corrective_factors", "factor '" + name + "' must be a fraction in [0, 1]");
        }
    }
}

double number_field(const json& body, const char* key, double fallback) {
    auto it = body.find(key);
    if (it == body.end() || it->is_null()) return fallback;
    if (!it->is_number()) throw ParameterError(key, "must be a number");
    return it->get<double>();
}

}  // namespace

void validate(const CapacityParams& params) {
    if (!(std::isfinite(params.area_per_pedestrian) && params.area_per_pedestrian > 0.0))
        throw ParameterError("area_per_pedestrian", "must be positive");
    if (!(std::isfinite(params.rotation_factor) && params.rotation_factor > 0.0))
        throw ParameterError("rotation_factor", "must be positive");
    require_factors(params.corrective_factors);
    require_fraction("management_capacity", params.management_capacity);
}

double rotation_factor(double usable_hours, double mean_visit_hours) {
    if (!(usable_hours > 0.0)) throw ParameterError("usable_hours", "must be positive");
    if (!(mean_visit_hours > 0.0)) throw ParameterError("mean_visit_hours", "must be positive");
    if (mean_visit_hours > usable_hours)
        throw ParameterError("mean_visit_hours", "cannot exceed the usable hours per day");
    return usable_hours / mean_visit_hours;
}

double corrective_factor(double limiting_magnitude, double total_magnitude) {
    if (!(total_magnitude > 0.0)) throw ParameterError("total_magnitude", "must be positive");
    if (!(limiting_magnitude >= 0.0 && limiting_magnitude <= total_magnitude))
        throw ParameterError("limiting_magnitude", "must lie in [0, total_magnitude]");
    return 1.0 - limiting_magnitude / total_magnitude;
}

double pcc(double area_m2, const CapacityParams& params) {
    if (!(std::isfinite(area_m2) && area_m2 >= 0.0)) throw ParameterError("walkable_area_m2", "must be >= 0");
    if (!(std::isfinite(params.area_per_pedestrian) && params.area_per_pedestrian > 0.0))
        throw ParameterError("area_per_pedestrian", "must be positive");
    if (!(std::isfinite(params.rotation_factor) && params.rotation_factor > 0.0))
        throw ParameterError("rotation_factor", "must be positive");
    return area_m2 / params.area_per_pedestrian * params.rotation_factor;
}

double rcc(double pcc_value, const std::vector<CorrectiveFactor>& factors) {
    require_factors(factors);
    double product = 1.0;
    for (const auto& f : factors) product *= f.value;
    return pcc_value * product;
}

double ecc(double rcc_value, double management_capacity) {
    require_fraction("management_capacity", management_capacity);
    return rcc_value * management_capacity;
}

CapacityReport assess(double walkable_area_m2, const CapacityParams& params) {
    validate(params);
    CapacityReport report;
    report.walkable_area_m2 = walkable_area_m2;
    report.params = params;
    report.pcc = pcc(walkable_area_m2, params);
    report.rcc = rcc(report.pcc, params.corrective_factors);
    report.ecc = ecc(report.rcc, params.management_capacity);
    return report;
}

json to_json(const CapacityReport& report, bool floor_values) {
    json factors = json::array();
    for (const auto& f : report.params.corrective_factors) factors.push_back({{"label", f.label}, {"value", f.value}});
    auto out = [&](double v) { return floor_values ? std::floor(v) : v; };
    return {
        {"inputs",
         {{"walkable_area_m2", report.walkable_area_m2},
          {"area_per_pedestrian", report.params.area_per_pedestrian},
          {"rotation_factor", report.params.rotation_factor},
          {"corrective_factors", std::move(factors)},
          {"management_capacity", report.params.management_capacity}}},
        {"pcc", out(report.pcc)},
        {"rcc", out(report.rcc)},
        {"ecc", out(report.ecc)},
    };
}

CapacityParams params_from_json(const json& body) {
    if (!body.is_object()) throw ParameterError("body", "must be a JSON object");
    CapacityParams params;
    params.area_per_pedestrian = number_field(body, "area_per_pedestrian", params.area_per_pedestrian);
    params.rotation_factor = number_field(body, "rotation_factor", params.rotation_factor);
    params.management_capacity = number_field(body, "management_capacity", params.management_capacity);
    if (auto it = body.find("corrective_factors"); it != body.end() && !it->is_null()) {
        if (!it->is_array()) throw ParameterError("corrective_factors", "must be an array");
        params.corrective_factors.clear();
        for (const auto& entry : *it) {
            CorrectiveFactor f;
            if (entry.is_number()) {
                f.value = entry.get<double>();
            } else if (entry.is_object() && entry.contains("value") && entry["value"].is_number()) {
                f.value = entry["value"].get<double>();
                if (auto label = entry.find("label"); label != entry.end() && !label->is_null()) {
                    if (!label->is_string()) throw ParameterError("corrective_factors", "labels must be strings");
                    f.label = label->get<std::string>();
                }
            } else {
                throw ParameterError("corrective_factors", "entries must be numbers or {label, value} objects");
            }
            params.corrective_factors.push_back(std::move(f));
        }
    }
    validate(params);
    return params;
}

json request_schema() {
    const CapacityParams d;
    json factors = json::array();
    for (const auto& f : d.corrective_factors) factors.push_back({{"label", f.label}, {"value", f.value}});
    return {
        {"$schema", "https://json-schema.org/draft/2020-12/schema"},
        {"type", "object"},
        {"required", {"walkable_area_m2"}},
        {"properties",
         {{"walkable_area_m2",
           {{"type", "number"}, {"minimum", 0}, {"description", "Walkable area A in square meters."}}},
          {"area_per_pedestrian",
           {{"type", "number"},
            {"exclusiveMinimum", 0},
            {"default", d.area_per_pedestrian},
            {"description", "Ap, square meters one pedestrian needs to move comfortably."}}},
          {"rotation_factor",
           {{"type", "number"},
            {"exclusiveMinimum", 0},
            {"default", d.rotation_factor},
            {"description", "Rf, daily visits: usable hours per day over the mean visit length."}}},
          {"corrective_factors",
           {{"type", "array"},
            {"default", factors},
            {"description",
             "Limiting factors cf = 1 - Lm/Tm, each multiplying the physical capacity. "
             "An empty list applies none."},
            {"items",
             {{"oneOf",
               {{{"type", "number"}, {"minimum", 0}, {"maximum", 1}},
                {{"type", "object"},
                 {"required", {"value"}},
                 {"properties",
                  {{"label", {{"type", "string"}}},
                   {"value", {{"type", "number"}, {"minimum", 0}, {"maximum", 1}}}}}}}}}}}},
          {"management_capacity",
           {{"type", "number"},
            {"minimum", 0},
            {"maximum", 1},
            {"default", d.management_capacity},
            {"description", "Mc, share of the ideal management capacity the destination has."}}},
          {"floor",
           {{"type", "boolean"},
            {"default", false},
            {"description", "Round the three capacities down to whole persons."}}}}}};
}

}  // namespace walkcap::capacity
