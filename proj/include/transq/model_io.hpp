#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "transq/arrival.hpp"
#include "transq/service.hpp"

namespace transq::io {

/// Syntax errors, missing keys, wrong types or inconsistent shapes.
class MalformedInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A structurally sound model file. `report` lists content violations of the
/// arrival process and of the service parameters; `service` is empty when
/// the service parameters were rejected.
struct LoadedModel {
    DBmapModel model;
    std::optional<ServiceLaw> service;
    ValidationReport report;
};

/// Schema:
///   {"states": K,
///    "batches": [D_0, ..., D_L],   each K x K, as K rows or K*K row-major numbers
///    "initial": [p0_1, ..., p0_K],
///    "service": {"type": "geometric", "alpha": a}
///             | {"type": "shifted_poisson", "lambda": l}
///             | {"type": "deterministic", "d": d}
///             | {"type": "pmf", "q": [q_1, ..., q_M]}}
LoadedModel parse_model(const nlohmann::json& doc);
LoadedModel parse_model_text(const std::string& text);
LoadedModel read_model_file(const std::string& path);

nlohmann::json service_to_json(const ServiceLaw& law);
nlohmann::json model_to_json(const DBmapModel& model, const ServiceLaw& law);

/// Serialises `value` with every floating-point number printed with 17
/// significant digits. `indent` < 0 gives compact output.
void write_json(std::ostream& os, const nlohmann::json& value, int indent = 2);
std::string format_number(double x);

} // namespace transq::io
