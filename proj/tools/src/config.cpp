// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include "schema_text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>
#include <set>
#include <sstream>

namespace stcloc::cli {

using nlohmann::json;

namespace {

std::string summarize(const std::vector<Diagnostic> &diags)
{
    std::string s = "invalid configuration";
    for (const auto &d : diags)
    {
        s += "\n  ";
        if (d.line > 0)
            s += "line " + std::to_string(d.line) + ": ";
        s += (d.path.empty() ? "/" : d.path) + ": " + d.message;
    }
    return s;
}

std::string escape_token(std::string_view key)
{
    std::string out;
    for (char c : key)
    {
        if (c == '~')
            out += "~0";
        else if (c == '/')
            out += "~1";
        else
            out += c;
    }
    return out;
}

// Recursive walk over text that nlohmann already accepted.
class LineScanner
{
  public:
    explicit LineScanner(std::string_view text) : text_(text) {}

    std::map<std::string, int> run()
    {
        skip_ws();
        lines_[""] = line_;
        value("");
        return std::move(lines_);
    }

  private:
    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    std::map<std::string, int> lines_;

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void advance()
    {
        if (peek() == '\n')
            ++line_;
        ++pos_;
    }

    void skip_ws()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(peek())))
            advance();
    }

    std::string string_token()
    {
        std::string out;
        advance(); // opening quote
        while (pos_ < text_.size() && peek() != '"')
        {
            if (peek() == '\\')
            {
                advance();
                const char e = peek();
                if (e == 'u')
                {
                    // Kept verbatim; no schema key needs it decoded.
                    out += "\\u" + std::string(text_.substr(pos_ + 1, 4));
                    pos_ += 4;
                }
                else
                    out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
            }
            else
                out += peek();
            advance();
        }
        advance(); // closing quote
        return out;
    }

    void value(const std::string &path)
    {
        skip_ws();
        const char c = peek();
        if (c == '{')
        {
            advance();
            for (;;)
            {
                skip_ws();
                if (peek() == '}')
                    break;
                const int key_line = line_;
                const std::string child = path + "/" + escape_token(string_token());
                lines_[child] = key_line;
                skip_ws();
                advance(); // ':'
                value(child);
                skip_ws();
                if (peek() == ',')
                    advance();
            }
            advance();
        }
        else if (c == '[')
        {
            advance();
            for (std::size_t i = 0;; ++i)
            {
                skip_ws();
                if (peek() == ']')
                    break;
                const std::string child = path + "/" + std::to_string(i);
                lines_[child] = line_;
                value(child);
                skip_ws();
                if (peek() == ',')
                    advance();
            }
            advance();
        }
        else if (c == '"')
            string_token();
        else
            while (pos_ < text_.size() && std::string_view(",]} \t\r\n").find(peek()) == std::string_view::npos)
                advance();
    }
};

bool is_integer(const json &v)
{
    return v.is_number_integer() || (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
}

bool has_type(const json &v, const std::string &type)
{
    if (type == "object")
        return v.is_object();
    if (type == "array")
        return v.is_array();
    if (type == "string")
        return v.is_string();
    if (type == "boolean")
        return v.is_boolean();
    if (type == "null")
        return v.is_null();
    if (type == "number")
        return v.is_number();
    if (type == "integer")
        return v.is_number() && is_integer(v);
    return false;
}

std::string type_name(const json &v)
{
    return v.is_number() ? (is_integer(v) ? "integer" : "number") : v.type_name();
}

std::string num(double v)
{
    std::ostringstream s;
    s << v;
    return s.str();
}

void check(const json &v, const json &schema, const std::string &path, std::vector<Diagnostic> &out)
{
    auto fail = [&](std::string msg) { out.push_back({0, path, std::move(msg)}); };

    if (auto it = schema.find("type"); it != schema.end())
    {
        std::vector<std::string> types;
        if (it->is_string())
            types.push_back(*it);
        else
            for (const auto &t : *it)
                types.push_back(t);
        bool ok = false;
        for (const auto &t : types)
            ok = ok || has_type(v, t);
        if (!ok)
        {
            std::string want;
            for (const auto &t : types)
                want += (want.empty() ? "" : " or ") + t;
            fail("expected " + want + ", got " + type_name(v));
            return;
        }
    }
    if (auto it = schema.find("enum"); it != schema.end())
    {
        bool found = false;
        std::string allowed;
        for (const auto &e : *it)
        {
            found = found || e == v;
            allowed += (allowed.empty() ? "" : ", ") + (e.is_string() ? e.get<std::string>() : e.dump());
        }
        if (!found)
            fail("must be one of: " + allowed);
    }
    if (v.is_number())
    {
        const double x = v.get<double>();
        if (auto it = schema.find("minimum"); it != schema.end() && x < it->get<double>())
            fail("must be >= " + num(*it));
        if (auto it = schema.find("maximum"); it != schema.end() && x > it->get<double>())
            fail("must be <= " + num(*it));
        if (auto it = schema.find("exclusiveMinimum"); it != schema.end() && x <= it->get<double>())
            fail("must be > " + num(*it));
        if (auto it = schema.find("exclusiveMaximum"); it != schema.end() && x >= it->get<double>())
            fail("must be < " + num(*it));
    }
    if (v.is_string())
    {
        const auto &s = v.get_ref<const std::string &>();
        if (auto it = schema.find("minLength"); it != schema.end() && s.size() < it->get<std::size_t>())
            fail("must have at least " + it->dump() + " characters");
        if (auto it = schema.find("pattern"); it != schema.end() && !std::regex_search(s, std::regex(it->get<std::string>())))
            fail("must match " + it->get<std::string>());
    }
    if (v.is_array())
    {
        if (auto it = schema.find("minItems"); it != schema.end() && v.size() < it->get<std::size_t>())
            fail("must have at least " + it->dump() + " items");
        if (auto it = schema.find("maxItems"); it != schema.end() && v.size() > it->get<std::size_t>())
            fail("must have at most " + it->dump() + " items");
        if (auto it = schema.find("items"); it != schema.end())
            for (std::size_t i = 0; i < v.size(); ++i)
                check(v[i], *it, path + "/" + std::to_string(i), out);
    }
    if (v.is_object())
    {
        const auto props = schema.value("properties", json::object());
        if (auto it = schema.find("required"); it != schema.end())
            for (const auto &key : *it)
                if (!v.contains(key.get<std::string>()))
                    fail("missing required property '" + key.get<std::string>() + "'");
        for (const auto &[key, child] : v.items())
        {
            const std::string child_path = path + "/" + escape_token(key);
            if (props.contains(key))
                check(child, props[key], child_path, out);
            else if (schema.value("additionalProperties", true) == false)
                out.push_back({0, child_path, "unknown property '" + key + "'"});
        }
    }
}

int line_for(const std::map<std::string, int> &lines, std::string path)
{
    // Defaulted values have no line of their own; fall back to the nearest written parent.
    for (;;)
    {
        if (auto it = lines.find(path); it != lines.end())
            return it->second;
        if (path.empty())
            return 0;
        path.erase(path.rfind('/'));
    }
}

// nlohmann reports the 1-based byte at which parsing stopped.
int line_of(std::string_view text, std::size_t byte)
{
    const auto end = std::min(byte > 0 ? byte - 1 : 0, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(end), '\n'));
}

Vec2 vec2(const json &a) { return {a[0].get<double>(), a[1].get<double>()}; }

cplx complex_of(const json &a) { return {a[0].get<double>(), a[1].get<double>()}; }

std::optional<double> optional_number(const json &v)
{
    return v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
}

} // namespace

ConfigError::ConfigError(std::vector<Diagnostic> diags) : std::runtime_error(summarize(diags)), diags_(std::move(diags))
{
}

ConfigError::ConfigError(std::string path, std::string message, int line)
    : ConfigError(std::vector<Diagnostic>{{line, std::move(path), std::move(message)}})
{
}

std::map<std::string, int> locate_lines(std::string_view text) { return LineScanner(text).run(); }

std::vector<Diagnostic> validate(const json &value, const json &schema)
{
    std::vector<Diagnostic> out;
    check(value, schema, "", out);
    return out;
}

void apply_defaults(json &value, const json &schema)
{
    if (value.is_object())
    {
        if (auto props = schema.find("properties"); props != schema.end())
            for (const auto &[key, sub] : props->items())
            {
                if (!value.contains(key) && sub.contains("default"))
                    value[key] = sub["default"];
                if (value.contains(key))
                    apply_defaults(value[key], sub);
            }
    }
    else if (value.is_array())
    {
        if (auto items = schema.find("items"); items != schema.end())
            for (auto &v : value)
                apply_defaults(v, *items);
    }
}

std::string_view experiment_schema_text() { return schema_text; }

const json &experiment_schema()
{
    static const json schema = json::parse(schema_text);
    return schema;
}

double Experiment::capture() const
{
    return duration ? *duration : capture_duration(receiver, num_windows, f0(), sample_rate());
}

ScenarioSettings Experiment::scenario_settings() const
{
    ScenarioSettings s;
    s.receiver = receiver;
    s.samples_per_period = samples_per_period;
    s.num_windows = num_windows;
    s.grid_step = grid_step;
    s.taper = taper;
    s.mode = mode;
    s.min_conditioning = min_conditioning;
    return s;
}

Experiment load_experiment(std::string_view text)
{
    json j;
    try
    {
        j = json::parse(text);
    }
    catch (const json::parse_error &e)
    {
        std::string msg = e.what();
        if (auto p = msg.find("parse error"); p != std::string::npos)
            msg = msg.substr(p);
        throw ConfigError("", msg, line_of(text, e.byte));
    }

    const auto lines = locate_lines(text);
    auto diags = validate(j, experiment_schema());
    if (!diags.empty())
    {
        for (auto &d : diags)
            d.line = line_for(lines, d.path);
        std::stable_sort(diags.begin(), diags.end(), [](const auto &a, const auto &b) { return a.line < b.line; });
        throw ConfigError(std::move(diags));
    }
    apply_defaults(j, experiment_schema());

    // Cross-field rules the schema cannot express.
    std::vector<Diagnostic> semantic;
    auto reject = [&](std::string path, std::string msg) {
        const int line = line_for(lines, path);
        semantic.push_back({line, std::move(path), std::move(msg)});
    };

    const auto &jr = j["ris"];
    const auto &jc = j["code"];
    const auto columns = jr["columns"].get<std::size_t>();

    const double tau = jc["bit_duration_s"];
    std::optional<BinaryCode> base;
    if (jc["bits"].is_null())
        base = BinaryCode::single_bit(columns, 0, tau);
    else
        base = BinaryCode::from_string(jc["bits"].get<std::string>(), tau);

    std::vector<long> shifts;
    if (jc["shifts"].is_null())
        for (std::size_t q = 0; q < columns; ++q)
            shifts.push_back(static_cast<long>(q));
    else
    {
        shifts = jc["shifts"].get<std::vector<long>>();
        if (shifts.size() != columns)
            reject("/code/shifts", "needs one shift per column (" + std::to_string(columns) + ")");
    }
    if (shifts.size() != columns)
        throw ConfigError(std::move(semantic));

    Experiment e(CodeSchedule(*base, shifts));
    e.output_dir = j["output_dir"];
    e.seed = j["seed"];

    const double fc = jr["carrier_frequency_hz"];
    e.ris = RisConfig::half_wavelength(columns, jr["rows"].get<std::size_t>(), fc);
    if (!jr["spacing_m"].is_null())
        e.ris.spacing = jr["spacing_m"];
    e.ris.reflection_map = {complex_of(jr["reflection_map"]["off"]), complex_of(jr["reflection_map"]["on"])};
    for (const char *state : {"off", "on"})
        if (std::abs(complex_of(jr["reflection_map"][state])) > 1.0)
            reject(std::string("/ris/reflection_map/") + state, "reflection magnitude must be <= 1");
    e.taper = jr["taper"] == "cosine" ? ElementTaper::cosine : ElementTaper::none;
    e.grid_step = j["pattern"]["grid_step_deg"];

    const auto &jch = j["channel"];
    e.channel.snr_db = optional_number(jch["snr_db"]);
    e.channel.carrier_leak = jch["carrier_leak"];
    for (const auto &tap : jch["multipath_taps"])
        e.channel.multipath_taps.push_back({tap["delay_s"], complex_of(tap["gain"]), tap["arrival_angle_deg"]});
    e.channel.rng_seed = e.seed;

    const auto &jw = j["waveform"];
    e.rx_angle = jw["rx_angle_deg"];
    e.samples_per_period = jw["samples_per_period"];
    e.num_windows = jw["num_windows"];
    e.duration = optional_number(jw["duration_s"]);
    e.mode = jw["mode"] == "time_domain" ? SynthesisMode::time_domain : SynthesisMode::harmonic_domain;

    const auto &jrx = j["receiver"];
    e.receiver.window_periods = jrx["window_periods"];
    e.receiver.overlap = jrx["overlap"];
    e.receiver.window = jrx["window"] == "hann" ? WindowKind::hann : WindowKind::rectangular;
    e.receiver.f0_known = jrx["f0_known"];
    e.receiver.exclude_orders.clear();
    for (const auto &n : jrx["exclude_orders"])
        e.receiver.exclude_orders.insert(n.get<int>());
    e.receiver.combine.mode = jrx["combine"] == "power" ? CombineMode::power : CombineMode::linear;
    const std::string scaling = jrx["pattern_scaling"];
    e.receiver.combine.scaling = scaling == "raw"            ? PatternScaling::raw
                                 : scaling == "per_harmonic" ? PatternScaling::per_harmonic
                                                             : PatternScaling::per_angle;
    e.receiver.confidence_threshold = jrx["confidence_threshold"];

    const auto &js = j["sweep"];
    const double start = js["angle_start_deg"], stop = js["angle_stop_deg"], step = js["angle_step_deg"];
    if (stop < start)
        reject("/sweep/angle_stop_deg", "empty sweep axis: stop is below start");
    else
    {
        // Integer stepping keeps the axis free of accumulated rounding.
        const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i)
            e.sweep.angles.push_back(start + static_cast<double>(i) * step);
    }
    for (const auto &s : js["snr_db"])
        e.sweep.snr_db.push_back(optional_number(s));
    e.sweep.seeds = js["seeds"];

    const auto &jsc = j["scenario"];
    e.scenario = scenario_from_string(jsc["kind"].get<std::string>());
    std::set<std::string> names;
    for (std::size_t i = 0; i < jsc["nodes"].size(); ++i)
    {
        const auto &n = jsc["nodes"][i];
        const std::string name = n["name"];
        if (!names.insert(name).second)
            reject("/scenario/nodes/" + std::to_string(i) + "/name", "duplicate node name '" + name + "'");
        e.world.nodes.push_back(
            {name, {vec2(n["position"]), n["boresight_deg"], n["comb_offset_hz"]}, e.ris, e.schedule});
    }
    if (!jsc["user"].is_null())
        e.world.user = vec2(jsc["user"]);
    if (!jsc["base_station"].is_null())
        e.world.base_station = vec2(jsc["base_station"]);
    e.min_conditioning = jsc["min_conditioning"];

    try
    {
        e.ris.validate();
        e.channel.validate();
    }
    catch (const std::invalid_argument &err)
    {
        reject("", err.what());
    }
    if (!semantic.empty())
        throw ConfigError(std::move(semantic));

    e.resolved = std::move(j);
    return e;
}

} // namespace stcloc::cli
