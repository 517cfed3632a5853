#include "transq/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace transq::io {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key)
{
    if (!obj.is_object() || !obj.contains(key)) {
        throw MalformedInput(std::string("missing key \"") + key + "\"");
    }
    return obj.at(key);
}

double number(const json& v, const std::string& what)
{
    if (!v.is_number()) {
        throw MalformedInput(what + " must be a number");
    }
    return v.get<double>();
}

Matrix read_matrix(const json& v, int k, const std::string& what)
{
    Matrix m(k, k);
    if (!v.is_array()) {
        throw MalformedInput(what + " must be an array");
    }
    if (v.size() == static_cast<std::size_t>(k) && v[0].is_array()) {
        for (int i = 0; i < k; ++i) {
            const auto& row = v[static_cast<std::size_t>(i)];
            if (!row.is_array() || row.size() != static_cast<std::size_t>(k)) {
                throw MalformedInput(what + " row " + std::to_string(i) + " must have " + std::to_string(k) +
                                     " entries");
            }
            for (int j = 0; j < k; ++j) {
                m(i, j) = number(row[static_cast<std::size_t>(j)], what);
            }
        }
        return m;
    }
    if (v.size() != static_cast<std::size_t>(k * k)) {
        throw MalformedInput(what + " must be " + std::to_string(k) + "x" + std::to_string(k));
    }
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            m(i, j) = number(v[static_cast<std::size_t>(i * k + j)], what);
        }
    }
    return m;
}

ServiceLaw read_service(const json& s)
{
    const auto& type = require(s, "type");
    if (!type.is_string()) {
        throw MalformedInput("service type must be a string");
    }
    const auto name = type.get<std::string>();
    if (name == "geometric") {
        return ServiceLaw::geometric(number(require(s, "alpha"), "alpha"));
    }
    if (name == "shifted_poisson") {
        return ServiceLaw::shifted_poisson(number(require(s, "lambda"), "lambda"));
    }
    if (name == "deterministic") {
        const auto& d = require(s, "d");
        if (!d.is_number_integer()) {
            throw MalformedInput("deterministic service time must be an integer");
        }
        return ServiceLaw::deterministic(d.get<int>());
    }
    if (name == "pmf") {
        const auto& q = require(s, "q");
        if (!q.is_array()) {
            throw MalformedInput("pmf q must be an array");
        }
        std::vector<double> values;
        for (const auto& x : q) {
            values.push_back(number(x, "q"));
        }
        return ServiceLaw::pmf(std::move(values));
    }
    throw MalformedInput("unknown service type \"" + name + "\"");
}

void write_value(std::ostream& os, const json& v, int indent, int depth)
{
    const auto newline = [&](int d) {
        if (indent >= 0) {
            os << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
        }
    };
    switch (v.type()) {
    case json::value_t::object: {
        if (v.empty()) {
            os << "{}";
            break;
        }
        os << '{';
        bool first = true;
        for (auto it = v.begin(); it != v.end(); ++it) {
            if (!first) {
                os << ',';
            }
            first = false;
            newline(depth + 1);
            os << json(it.key()).dump() << (indent >= 0 ? ": " : ":");
            write_value(os, it.value(), indent, depth + 1);
        }
        newline(depth);
        os << '}';
        break;
    }
    case json::value_t::array: {
        // Arrays of scalars stay on one line.
        bool flat = true;
        for (const auto& e : v) {
            flat = flat && !e.is_structured();
        }
        os << '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i > 0) {
                os << (flat && indent >= 0 ? ", " : ",");
            }
            if (!flat) {
                newline(depth + 1);
            }
            write_value(os, v[i], indent, depth + 1);
        }
        if (!flat && !v.empty()) {
            newline(depth);
        }
        os << ']';
        break;
    }
    case json::value_t::number_float:
        os << format_number(v.get<double>());
        break;
    default:
        os << v.dump();
    }
}

} // namespace

std::string format_number(double x)
{
    if (!std::isfinite(x)) {
        return "null";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

LoadedModel parse_model(const json& doc)
{
    if (!doc.is_object()) {
        throw MalformedInput("model file must be a JSON object");
    }
    const auto& states = require(doc, "states");
    if (!states.is_number_integer() || states.get<long long>() < 1) {
        throw MalformedInput("\"states\" must be a positive integer");
    }
    const int k = states.get<int>();
    const auto& batches_json = require(doc, "batches");
    if (!batches_json.is_array() || batches_json.empty()) {
        throw MalformedInput("\"batches\" must be a non-empty array of matrices");
    }
    std::vector<Matrix> batches;
    for (std::size_t l = 0; l < batches_json.size(); ++l) {
        batches.push_back(read_matrix(batches_json[l], k, "D_" + std::to_string(l)));
    }
    const auto& init_json = require(doc, "initial");
    if (!init_json.is_array() || init_json.size() != static_cast<std::size_t>(k)) {
        throw MalformedInput("\"initial\" must have " + std::to_string(k) + " entries");
    }
    RowVector init(k);
    for (int i = 0; i < k; ++i) {
        init(i) = number(init_json[static_cast<std::size_t>(i)], "initial");
    }
    const auto& service_json = require(doc, "service");

    LoadedModel out{DBmapModel(std::move(batches), std::move(init)), std::nullopt, {}};
    out.report = validate(out.model);
    try {
        out.service = read_service(service_json);
    } catch (const std::invalid_argument& e) {
        out.report.violations.push_back({"service", -1, 0.0, e.what()});
    }
    return out;
}

LoadedModel parse_model_text(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw MalformedInput(std::string("invalid JSON: ") + e.what());
    }
    return parse_model(doc);
}

LoadedModel read_model_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw MalformedInput("cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model_text(buf.str());
}

json service_to_json(const ServiceLaw& law)
{
    const auto& v = law.variant();
    if (const auto* g = std::get_if<Geometric>(&v)) {
        return {{"type", "geometric"}, {"alpha", g->alpha}};
    }
    if (const auto* s = std::get_if<ShiftedPoisson>(&v)) {
        return {{"type", "shifted_poisson"}, {"lambda", s->lambda}};
    }
    if (const auto* d = std::get_if<Deterministic>(&v)) {
        return {{"type", "deterministic"}, {"d", d->d}};
    }
    const auto& p = std::get<ExplicitPmf>(v);
    return {{"type", "pmf"}, {"q", p.q}};
}

json model_to_json(const DBmapModel& model, const ServiceLaw& law)
{
    const int k = model.num_states();
    json batches = json::array();
    for (const auto& d : model.batches()) {
        json rows = json::array();
        for (int i = 0; i < k; ++i) {
            json row = json::array();
            for (int j = 0; j < k; ++j) {
                row.push_back(d(i, j));
            }
            rows.push_back(std::move(row));
        }
        batches.push_back(std::move(rows));
    }
    json init = json::array();
    for (int i = 0; i < k; ++i) {
        init.push_back(model.initial()(i));
    }
    return {{"states", k}, {"batches", batches}, {"initial", init}, {"service", service_to_json(law)}};
}

void write_json(std::ostream& os, const json& value, int indent)
{
    write_value(os, value, indent, 0);
    os << '\n';
}

} // namespace transq::io
