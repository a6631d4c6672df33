#pragma once

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace walkcap::capacity {

/// A parameter outside its admissible range. `field()` names the offending
/// input using the JSON field names of the report schema.
class ParameterError : public std::invalid_argument {
public:
    ParameterError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct CorrectiveFactor {
    std::string label;
    double value = 1.0;  // fraction in [0, 1]

    friend bool operator==(const CorrectiveFactor&, const CorrectiveFactor&) = default;
};

/// Defaults:
/// 2 m2 per pedestrian, 10 usable hours / 4 h visits, temperature 290/365,
/// precipitation (365-65)/365, management capacity 77.75%.
struct CapacityParams {
    double area_per_pedestrian = 2.0;  // m2 per person
    double rotation_factor = 2.5;      // visits per day
    std::vector<CorrectiveFactor> corrective_factors{{"temperature", 0.7945}, {"precipitation", 0.8219}};
    double management_capacity = 0.7775;

    friend bool operator==(const CapacityParams&, const CapacityParams&) = default;
};

struct CapacityReport {
    double walkable_area_m2 = 0.0;
    CapacityParams params;
    double pcc = 0.0;  // persons/day
    double rcc = 0.0;
    double ecc = 0.0;
};

/// Throws ParameterError naming the first invalid field.
void validate(const CapacityParams& params);

double rotation_factor(double usable_hours, double mean_visit_hours);

/// cf = 1 - Lm/Tm
double corrective_factor(double limiting_magnitude, double total_magnitude);

/// PCC = A / Ap * Rf
double pcc(double area_m2, const CapacityParams& params);

/// RCC = PCC * cf1 * ... * cfn. An empty list leaves PCC unchanged.
double rcc(double pcc_value, const std::vector<CorrectiveFactor>& factors);

/// ECC = RCC * Mc
double ecc(double rcc_value, double management_capacity);

CapacityReport assess(double walkable_area_m2, const CapacityParams& params);

/// {"inputs": {...}, "pcc": .., "rcc": .., "ecc": ..}. With `floor_values`
/// the three outputs are rounded down to whole persons.
nlohmann::json to_json(const CapacityReport& report, bool floor_values = false);

/// Reads the parameter members of a request body; absent members keep their
/// defaults. Throws ParameterError for wrong types or out-of-range values.
CapacityParams params_from_json(const nlohmann::json& body);

/// JSON Schema of the capacity request body: ranges, defaults and a help
/// text per field. Clients validate against it before calling the service.
nlohmann::json request_schema();

}  // namespace walkcap::capacity
