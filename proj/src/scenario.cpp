#include "nipah/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace nipah {

using json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path.string());
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open file for writing: " + path.string());
    }
    out << content;
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

const json& expect_object(const json& j, const std::string& ctx) {
    if (!j.is_object()) {
        throw ValidationError(ctx + ": expected a JSON object");
    }
    return j;
}

void reject_unknown_keys(const json& obj, const std::string& ctx,
                         std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
                return it.key() == k;
            }) == allowed.end()) {
            throw ValidationError(ctx + ": unknown key '" + it.key() + "'");
        }
    }
}

double get_number(const json& obj, const std::string& ctx, const char* key) {
    if (!obj.contains(key)) {
        throw ValidationError(ctx + ": missing required key '" + key + "'");
    }
    if (!obj[key].is_number()) {
        throw ValidationError(ctx + "." + key + ": expected a number");
    }
    return obj[key].get<double>();
}

double get_number_or(const json& obj, const std::string& ctx, const char* key, double dflt) {
    if (!obj.contains(key)) {
        return dflt;
    }
    if (!obj[key].is_number()) {
        throw ValidationError(ctx + "." + key + ": expected a number");
    }
    return obj[key].get<double>();
}

std::size_t get_count(const json& obj, const std::string& ctx, const char* key) {
    if (!obj.contains(key)) {
        throw ValidationError(ctx + ": missing required key '" + key + "'");
    }
    if (!obj[key].is_number_integer() || obj[key].get<long long>() < 0) {
        throw ValidationError(ctx + "." + key + ": expected a nonnegative integer");
    }
    return obj[key].get<std::size_t>();
}

std::size_t get_count_or(const json& obj, const std::string& ctx, const char* key,
                         std::size_t dflt) {
    if (!obj.contains(key)) {
        return dflt;
    }
    if (!obj[key].is_number_integer() || obj[key].get<long long>() < 0) {
        throw ValidationError(ctx + "." + key + ": expected a nonnegative integer");
    }
    return obj[key].get<std::size_t>();
}

std::string get_string_or(const json& obj, const std::string& ctx, const char* key,
                          const std::string& dflt) {
    if (!obj.contains(key)) {
        return dflt;
    }
    if (!obj[key].is_string()) {
        throw ValidationError(ctx + "." + key + ": expected a string");
    }
    return obj[key].get<std::string>();
}

bool get_bool_or(const json& obj, const std::string& ctx, const char* key, bool dflt) {
    if (!obj.contains(key)) {
        return dflt;
    }
    if (!obj[key].is_boolean()) {
        throw ValidationError(ctx + "." + key + ": expected a boolean");
    }
    return obj[key].get<bool>();
}

Mixing parse_mixing(const std::string& s, const std::string& ctx) {
    if (s == "constant_n") return Mixing::ConstantN;
    if (s == "dynamic_n") return Mixing::DynamicN;
    throw ValidationError(ctx + ": expected \"constant_n\" or \"dynamic_n\", got \"" + s + "\"");
}

Mode parse_mode(const std::string& s, const std::string& ctx) {
    if (s == "treatment_free") return Mode::TreatmentFree;
    if (s == "full") return Mode::Full;
    if (s == "controlled") return Mode::Controlled;
    throw ValidationError(ctx + ": expected \"treatment_free\", \"full\" or \"controlled\", got \"" +
                          s + "\"");
}

const char* mode_name(Mode m) {
    switch (m) {
    case Mode::TreatmentFree: return "treatment_free";
    case Mode::Full: return "full";
    case Mode::Controlled: return "controlled";
    }
    return "full";
}

constexpr const char* kParamKeys[] = {"pi",   "beta", "sigma", "gamma", "delta", "nu",
                                      "alpha", "eps1", "eps2",  "theta", "mu",    "n_total"};

Params parse_params(const json& obj) {
    expect_object(obj, "params");
    reject_unknown_keys(obj, "params",
                        {"pi", "beta", "sigma", "gamma", "delta", "nu", "alpha", "eps1", "eps2",
                         "theta", "mu", "n_total", "mixing"});
    Params p;
    p.pi = get_number(obj, "params", "pi");
    p.beta = get_number(obj, "params", "beta");
    p.sigma = get_number(obj, "params", "sigma");
    p.gamma = get_number(obj, "params", "gamma");
    p.delta = get_number(obj, "params", "delta");
    p.nu = get_number(obj, "params", "nu");
    p.alpha = get_number(obj, "params", "alpha");
    p.eps1 = get_number(obj, "params", "eps1");
    p.eps2 = get_number(obj, "params", "eps2");
    p.theta = get_number(obj, "params", "theta");
    p.mu = get_number(obj, "params", "mu");
    p.n_total = get_number(obj, "params", "n_total");
    p.mixing = parse_mixing(get_string_or(obj, "params", "mixing", "constant_n"), "params.mixing");
    return p;
}

State parse_state(const json& obj, const std::string& ctx) {
    expect_object(obj, ctx);
    reject_unknown_keys(obj, ctx, {"s", "e", "i", "t", "r"});
    State x;
    x.s = get_number(obj, ctx, "s");
    x.e = get_number(obj, ctx, "e");
    x.i = get_number(obj, ctx, "i");
    x.t = get_number(obj, ctx, "t");
    x.r = get_number(obj, ctx, "r");
    return x;
}

TimeGrid parse_grid(const json& obj) {
    expect_object(obj, "grid");
    reject_unknown_keys(obj, "grid", {"t0", "tf", "n_steps"});
    TimeGrid g;
    g.t0 = get_number(obj, "grid", "t0");
    g.tf = get_number(obj, "grid", "tf");
    g.n_steps = get_count(obj, "grid", "n_steps");
    return g;
}

FbsConfig parse_fbs(const json& obj) {
    expect_object(obj, "fbs");
    reject_unknown_keys(obj, "fbs", {"relaxation", "tol", "max_iters", "weights", "bounds"});
    FbsConfig cfg;
    cfg.relaxation = get_number_or(obj, "fbs", "relaxation", cfg.relaxation);
    cfg.tol = get_number_or(obj, "fbs", "tol", cfg.tol);
    cfg.max_iters = get_count_or(obj, "fbs", "max_iters", cfg.max_iters);
    if (obj.contains("weights")) {
        const json& w = expect_object(obj["weights"], "fbs.weights");
        reject_unknown_keys(w, "fbs.weights", {"b1", "b2", "w1", "w2", "w3"});
        cfg.weights.b1 = get_number_or(w, "fbs.weights", "b1", cfg.weights.b1);
        cfg.weights.b2 = get_number_or(w, "fbs.weights", "b2", cfg.weights.b2);
        cfg.weights.w1 = get_number_or(w, "fbs.weights", "w1", cfg.weights.w1);
        cfg.weights.w2 = get_number_or(w, "fbs.weights", "w2", cfg.weights.w2);
        cfg.weights.w3 = get_number_or(w, "fbs.weights", "w3", cfg.weights.w3);
    }
    if (obj.contains("bounds")) {
        const json& b = expect_object(obj["bounds"], "fbs.bounds");
        reject_unknown_keys(b, "fbs.bounds", {"lower", "upper"});
        cfg.bounds.lower = get_number_or(b, "fbs.bounds", "lower", cfg.bounds.lower);
        cfg.bounds.upper = get_number_or(b, "fbs.bounds", "upper", cfg.bounds.upper);
    }
    return cfg;
}

Scenario parse_scenario(const json& doc) {
    expect_object(doc, "scenario");
    reject_unknown_keys(doc, "scenario",
                        {"label", "time_unit", "params", "initial_state", "grid", "mode",
                         "controls", "fbs", "check_invariant_region"});
    for (const char* key : {"params", "initial_state", "grid", "mode"}) {
        if (!doc.contains(key)) {
            throw ValidationError(std::string("scenario: missing required key '") + key + "'");
        }
    }

    Scenario sc;
    sc.label = get_string_or(doc, "scenario", "label", "scenario");
    sc.time_unit = get_string_or(doc, "scenario", "time_unit", "years");
    sc.params = parse_params(doc["params"]);
    sc.x0 = parse_state(doc["initial_state"], "initial_state");
    sc.grid = parse_grid(doc["grid"]);
    if (!doc["mode"].is_string()) {
        throw ValidationError("scenario.mode: expected a string");
    }
    sc.mode = parse_mode(doc["mode"].get<std::string>(), "scenario.mode");
    sc.check_invariant_region =
        get_bool_or(doc, "scenario", "check_invariant_region", true);

    if (sc.mode != Mode::Controlled) {
        for (const char* key : {"controls", "fbs"}) {
            if (doc.contains(key)) {
                throw ValidationError(std::string("scenario: key '") + key +
                                      "' is only valid in controlled mode");
            }
        }
    } else {
        if (doc.contains("controls")) {
            const json& c = expect_object(doc["controls"], "controls");
            reject_unknown_keys(c, "controls", {"u1", "u2", "u3"});
            sc.fixed_controls.u1 = get_number_or(c, "controls", "u1", 0.0);
            sc.fixed_controls.u2 = get_number_or(c, "controls", "u2", 0.0);
            sc.fixed_controls.u3 = get_number_or(c, "controls", "u3", 0.0);
            for (double u : {sc.fixed_controls.u1, sc.fixed_controls.u2, sc.fixed_controls.u3}) {
                if (!(u >= 0) || !(u < 1)) {
                    throw ValidationError("controls: components must lie in [0, 1)");
                }
            }
        }
        if (doc.contains("fbs")) {
            sc.fbs = parse_fbs(doc["fbs"]);
        }
        sc.fbs.grid = sc.grid;
    }

    sc.params.validate();
    sc.x0.validate_nonnegative("initial_state");
    sc.grid.validate();
    if (sc.mode == Mode::Controlled) {
        sc.fbs.validate();
    }
    return sc;
}

// --set overrides are written into the raw document, so an invalid value
// fails validation exactly like an invalid file.
void apply_override(json& doc, const Override& kv) {
    const std::string& key = kv.first;
    const std::string& val = kv.second;
    auto as_number = [&]() -> json {
        try {
            std::size_t pos = 0;
            const double d = std::stod(val, &pos);
            if (pos != val.size()) {
                throw std::invalid_argument(val);
            }
            if (d == std::floor(d) && std::abs(d) < 1e15 &&
                val.find_first_of(".eE") == std::string::npos) {
                return json(static_cast<long long>(d));
            }
            return json(d);
        } catch (const std::exception&) {
            throw ValidationError("--set " + key + ": expected a numeric value, got \"" + val +
                                  "\"");
        }
    };

    for (const char* pk : kParamKeys) {
        if (key == pk) {
            doc["params"][key] = as_number();
            return;
        }
    }
    if (key == "mixing") {
        doc["params"]["mixing"] = val;
        return;
    }
    if (key == "relaxation" || key == "tol") {
        doc["fbs"][key] = as_number();
        return;
    }
    if (key == "max_iters") {
        doc["fbs"][key] = as_number();
        return;
    }
    if (key == "b1" || key == "b2" || key == "w1" || key == "w2" || key == "w3") {
        doc["fbs"]["weights"][key] = as_number();
        return;
    }
    if (key == "u_lower") {
        doc["fbs"]["bounds"]["lower"] = as_number();
        return;
    }
    if (key == "u_upper") {
        doc["fbs"]["bounds"]["upper"] = as_number();
        return;
    }
    throw ValidationError("--set: unknown key '" + key + "'");
}

json parse_document(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(what + ": invalid JSON: " + e.what());
    }
}

} // namespace

Scenario load_scenario(const std::string& json_text, std::span<const Override> overrides) {
    json doc = parse_document(json_text, "scenario");
    for (const Override& kv : overrides) {
        apply_override(doc, kv);
    }
    return parse_scenario(doc);
}

Scenario load_scenario_file(const std::filesystem::path& path,
                            std::span<const Override> overrides) {
    return load_scenario(read_file(path), overrides);
}

namespace {

json scenario_to_json(const Scenario& s) {
    json doc;
    doc["label"] = s.label;
    doc["time_unit"] = s.time_unit;
    json params;
    params["pi"] = s.params.pi;
    params["beta"] = s.params.beta;
    params["sigma"] = s.params.sigma;
    params["gamma"] = s.params.gamma;
    params["delta"] = s.params.delta;
    params["nu"] = s.params.nu;
    params["alpha"] = s.params.alpha;
    params["eps1"] = s.params.eps1;
    params["eps2"] = s.params.eps2;
    params["theta"] = s.params.theta;
    params["mu"] = s.params.mu;
    params["n_total"] = s.params.n_total;
    params["mixing"] = s.params.mixing == Mixing::ConstantN ? "constant_n" : "dynamic_n";
    doc["params"] = std::move(params);
    doc["initial_state"] = {{"s", s.x0.s}, {"e", s.x0.e}, {"i", s.x0.i}, {"t", s.x0.t},
                            {"r", s.x0.r}};
    doc["grid"] = {{"t0", s.grid.t0}, {"tf", s.grid.tf}, {"n_steps", s.grid.n_steps}};
    doc["mode"] = mode_name(s.mode);
    if (s.mode == Mode::Controlled) {
        doc["controls"] = {{"u1", s.fixed_controls.u1},
                           {"u2", s.fixed_controls.u2},
                           {"u3", s.fixed_controls.u3}};
        doc["fbs"] = {{"relaxation", s.fbs.relaxation},
                      {"tol", s.fbs.tol},
                      {"max_iters", s.fbs.max_iters},
                      {"weights",
                       {{"b1", s.fbs.weights.b1},
                        {"b2", s.fbs.weights.b2},
                        {"w1", s.fbs.weights.w1},
                        {"w2", s.fbs.weights.w2},
                        {"w3", s.fbs.weights.w3}}},
                      {"bounds", {{"lower", s.fbs.bounds.lower}, {"upper", s.fbs.bounds.upper}}}};
    }
    doc["check_invariant_region"] = s.check_invariant_region;
    return doc;
}

} // namespace

std::string serialize_scenario(const Scenario& s) {
    return scenario_to_json(s).dump(2) + "\n";
}

std::vector<std::string> lint_scenario(const Scenario& s) {
    std::vector<std::string> warnings;
    if (s.check_invariant_region) {
        const double cap = s.params.dfe_population();
        if (s.x0.total() > cap) {
            std::ostringstream os;
            os << "initial population " << s.x0.total() << " exceeds the invariant-region bound pi/mu = "
               << cap << "; boundedness checks will not apply";
            warnings.push_back(os.str());
        }
    }
    return warnings;
}

void set_param_by_name(Params& p, const std::string& name, double value) {
    static const std::pair<const char*, double Params::*> fields[] = {
        {"pi", &Params::pi},       {"beta", &Params::beta},   {"sigma", &Params::sigma},
        {"gamma", &Params::gamma}, {"delta", &Params::delta}, {"nu", &Params::nu},
        {"alpha", &Params::alpha}, {"eps1", &Params::eps1},   {"eps2", &Params::eps2},
        {"theta", &Params::theta}, {"mu", &Params::mu},       {"n_total", &Params::n_total}};
    for (const auto& [key, member] : fields) {
        if (name == key) {
            p.*member = value;
            return;
        }
    }
    throw ValidationError("unknown parameter '" + name + "'");
}

std::string trajectory_to_csv(const Trajectory& traj) {
    traj.validate_shape();
    std::string out;
    out.reserve(traj.states.size() * 96);
    out += "t,S,E,I,T,R";
    if (traj.has_controls()) {
        out += ",u1,u2,u3";
    }
    if (traj.has_adjoints()) {
        out += ",l1,l2,l3,l4,l5";
    }
    out += "\n";
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        out += fmt_double(traj.grid.time_at(i));
        for (double v : traj.states[i].to_array()) {
            out += ',';
            out += fmt_double(v);
        }
        if (traj.has_controls()) {
            const ControlVector& u = traj.controls[i];
            for (double v : {u.u1, u.u2, u.u3}) {
                out += ',';
                out += fmt_double(v);
            }
        }
        if (traj.has_adjoints()) {
            for (double v : traj.adjoints[i].to_array()) {
                out += ',';
                out += fmt_double(v);
            }
        }
        out += '\n';
    }
    return out;
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
    write_file(path, trajectory_to_csv(traj));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_csv_double(const std::string& s, const std::filesystem::path& path) {
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ValidationError("trajectory csv " + path.string() + ": bad number \"" + s + "\"");
    }
    return v;
}

} // namespace

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError("trajectory csv " + path.string() + ": empty file");
    }
    bool has_u = false;
    bool has_l = false;
    if (line == "t,S,E,I,T,R") {
    } else if (line == "t,S,E,I,T,R,u1,u2,u3") {
        has_u = true;
    } else if (line == "t,S,E,I,T,R,l1,l2,l3,l4,l5") {
        has_l = true;
    } else if (line == "t,S,E,I,T,R,u1,u2,u3,l1,l2,l3,l4,l5") {
        has_u = has_l = true;
    } else {
        throw ValidationError("trajectory csv " + path.string() + ": unrecognized header \"" +
                              line + "\"");
    }

    std::vector<double> times;
    Trajectory traj;
    const std::size_t expected = 6 + (has_u ? 3 : 0) + (has_l ? 5 : 0);
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != expected) {
            throw ValidationError("trajectory csv " + path.string() + ": expected " +
                                  std::to_string(expected) + " columns, got " +
                                  std::to_string(cells.size()));
        }
        std::size_t k = 0;
        times.push_back(parse_csv_double(cells[k++], path));
        State x;
        x.s = parse_csv_double(cells[k++], path);
        x.e = parse_csv_double(cells[k++], path);
        x.i = parse_csv_double(cells[k++], path);
        x.t = parse_csv_double(cells[k++], path);
        x.r = parse_csv_double(cells[k++], path);
        traj.states.push_back(x);
        if (has_u) {
            ControlVector u;
            u.u1 = parse_csv_double(cells[k++], path);
            u.u2 = parse_csv_double(cells[k++], path);
            u.u3 = parse_csv_double(cells[k++], path);
            traj.controls.push_back(u);
        }
        if (has_l) {
            std::array<double, 5> l{};
            for (double& v : l) {
                v = parse_csv_double(cells[k++], path);
            }
            traj.adjoints.push_back(AdjointState::from_array(l));
        }
    }
    if (times.size() < 3) {
        throw ValidationError("trajectory csv " + path.string() + ": fewer than 3 rows");
    }
    traj.grid = TimeGrid{times.front(), times.back(), times.size() - 1};
    return traj;
}

namespace {

SweepCell run_cell(const SweepSpec& spec, std::size_t index,
                   const std::vector<std::pair<std::string, double>>& settings) {
    SweepCell cell;
    cell.index = index;
    cell.settings = settings;
    try {
        Scenario sc = spec.base;
        for (const auto& [name, value] : settings) {
            set_param_by_name(sc.params, name, value);
        }
        sc.params.validate();

        Trajectory traj;
        Variant variant = Variant::Treatment;
        switch (sc.mode) {
        case Mode::TreatmentFree:
            variant = Variant::TreatmentFree;
            traj = simulate_uncontrolled(sc.params, sc.x0, sc.grid, variant);
            break;
        case Mode::Full:
            traj = simulate_uncontrolled(sc.params, sc.x0, sc.grid, Variant::Treatment);
            break;
        case Mode::Controlled:
            traj = simulate_controlled(sc.params, sc.x0, sc.grid, sc.fixed_controls);
            break;
        }

        cell.r0 = std::numeric_limits<double>::quiet_NaN();
        if (sc.params.mixing == Mixing::ConstantN) {
            cell.r0 = r0(sc.params, variant).value;
        }
        cell.peak_i = 0;
        std::vector<double> infected(traj.states.size());
        for (std::size_t i = 0; i < traj.states.size(); ++i) {
            infected[i] = traj.states[i].i;
            cell.peak_i = std::max(cell.peak_i, traj.states[i].i);
        }
        cell.cumulative_i = quadrature(infected, traj.grid);
        cell.final_r = traj.states.back().r;

        char name[32];
        std::snprintf(name, sizeof(name), "cell_%04zu.csv", index);
        cell.csv_file = name;
        write_trajectory_csv(traj, spec.outputs / name);
        cell.ok = true;
    } catch (const std::exception& ex) {
        cell.ok = false;
        cell.error = ex.what();
    }
    return cell;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out += c;
        }
    }
    out += '"';
    return out;
}

} // namespace

SweepSummary run_sweep(const SweepSpec& spec) {
    std::error_code ec;
    std::filesystem::create_directories(spec.outputs, ec);
    if (ec) {
        throw IoError("cannot create output directory: " + spec.outputs.string());
    }

    std::size_t total = 1;
    for (const SweepAxis& axis : spec.axes) {
        if (axis.values.empty()) {
            throw ValidationError("sweep axis '" + axis.param + "': needs at least one value");
        }
        total *= axis.values.size();
    }

    auto settings_for = [&spec](std::size_t index) {
        std::vector<std::pair<std::string, double>> settings;
        std::size_t rem = index;
        for (std::size_t a = spec.axes.size(); a-- > 0;) {
            const SweepAxis& axis = spec.axes[a];
            settings.emplace_back(axis.param, axis.values[rem % axis.values.size()]);
            rem /= axis.values.size();
        }
        std::reverse(settings.begin(), settings.end());
        return settings;
    };

    // Cartesian product, last axis fastest; cells are independent and run
    // concurrently in bounded waves, each writing only its own file.
    SweepSummary summary;
    summary.cells.reserve(total);
    summary.all_ok = true;
    const std::size_t wave = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    for (std::size_t begin = 0; begin < total; begin += wave) {
        const std::size_t end = std::min(total, begin + wave);
        std::vector<std::future<SweepCell>> futures;
        futures.reserve(end - begin);
        for (std::size_t index = begin; index < end; ++index) {
            futures.push_back(std::async(std::launch::async, run_cell, std::cref(spec), index,
                                         settings_for(index)));
        }
        for (auto& f : futures) {
            summary.cells.push_back(f.get());
            summary.all_ok = summary.all_ok && summary.cells.back().ok;
        }
    }

    std::string out = "index";
    for (const SweepAxis& axis : spec.axes) {
        out += ',' + axis.param;
    }
    out += ",status,r0,peak_I,cumulative_I,final_R,csv_file,error\n";
    for (const SweepCell& cell : summary.cells) {
        out += std::to_string(cell.index);
        for (const auto& [_, value] : cell.settings) {
            out += ',';
            out += fmt_double(value);
        }
        out += cell.ok ? ",ok" : ",failed";
        if (cell.ok) {
            out += ',' + (std::isnan(cell.r0) ? std::string() : fmt_double(cell.r0));
            out += ',' + fmt_double(cell.peak_i);
            out += ',' + fmt_double(cell.cumulative_i);
            out += ',' + fmt_double(cell.final_r);
            out += ',' + cell.csv_file + ',';
        } else {
            out += ",,,,,," + csv_quote(cell.error);
        }
        out += '\n';
    }
    summary.summary_csv = spec.outputs / "summary.csv";
    write_file(summary.summary_csv, out);
    return summary;
}

SweepSpec load_sweep_spec(const std::string& json_text, std::span<const Override> overrides) {
    json doc = parse_document(json_text, "sweep");
    expect_object(doc, "sweep");
    reject_unknown_keys(doc, "sweep", {"base", "axes", "outputs"});
    if (!doc.contains("base")) {
        throw ValidationError("sweep: missing required key 'base'");
    }
    if (!doc.contains("outputs") || !doc["outputs"].is_string()) {
        throw ValidationError("sweep: missing required string key 'outputs'");
    }

    json base = doc["base"];
    for (const Override& kv : overrides) {
        apply_override(base, kv);
    }

    SweepSpec spec;
    spec.base = parse_scenario(base);
    spec.outputs = doc["outputs"].get<std::string>();
    if (doc.contains("axes")) {
        if (!doc["axes"].is_array()) {
            throw ValidationError("sweep.axes: expected an array");
        }
        for (const json& entry : doc["axes"]) {
            expect_object(entry, "sweep.axes[]");
            reject_unknown_keys(entry, "sweep.axes[]", {"param", "values"});
            SweepAxis axis;
            if (!entry.contains("param") || !entry["param"].is_string()) {
                throw ValidationError("sweep.axes[]: missing string key 'param'");
            }
            axis.param = entry["param"].get<std::string>();
            {
                Params probe = spec.base.params; // reject unknown axis names early
                set_param_by_name(probe, axis.param, 1.0);
            }
            if (!entry.contains("values") || !entry["values"].is_array() ||
                entry["values"].empty()) {
                throw ValidationError("sweep.axes[] '" + axis.param +
                                      "': needs a nonempty 'values' array");
            }
            for (const json& v : entry["values"]) {
                if (!v.is_number()) {
                    throw ValidationError("sweep.axes[] '" + axis.param +
                                          "': values must be numbers");
                }
                axis.values.push_back(v.get<double>());
            }
            spec.axes.push_back(std::move(axis));
        }
    }
    return spec;
}

SweepSpec load_sweep_spec_file(const std::filesystem::path& path,
                               std::span<const Override> overrides) {
    return load_sweep_spec(read_file(path), overrides);
}

namespace {

json state_to_json(const State& x) {
    return {{"s", x.s}, {"e", x.e}, {"i", x.i}, {"t", x.t}, {"r", x.r}};
}

json spectrum_to_json(const SpectrumReport& sp) {
    json eigs = json::array();
    for (const auto& z : sp.eigenvalues) {
        eigs.push_back({{"re", z.real()}, {"im", z.imag()}});
    }
    const char* verdict = sp.verdict == StabilityVerdict::Stable      ? "stable"
                          : sp.verdict == StabilityVerdict::Unstable ? "unstable"
                                                                     : "indeterminate";
    return {{"eigenvalues", eigs}, {"max_real_part", sp.max_real_part}, {"verdict", verdict}};
}

json report_to_json(const AnalysisReport& rep) {
    json doc;
    doc["variant"] = rep.variant == Variant::TreatmentFree ? "treatment_free" : "treatment";
    doc["r0"] = rep.r0.value;
    doc["r0_factors"] = {rep.r0.factors[0], rep.r0.factors[1], rep.r0.factors[2]};
    doc["derived_rates"] = {{"p1", rep.rates.p1},
                            {"p2", rep.rates.p2},
                            {"p3", rep.rates.p3},
                            {"p4", rep.rates.p4}};
    doc["dfe"] = state_to_json(rep.dfe);
    doc["dfe_spectrum"] = spectrum_to_json(rep.dfe_spectrum);
    doc["verdicts"] = {{"dfe_locally_stable", rep.dfe_locally_stable},
                       {"endemic_exists", rep.endemic_exists}};
    if (rep.endemic) {
        doc["endemic"] = {{"state", state_to_json(rep.endemic->state)},
                          {"lambda_star", rep.endemic->lambda_star}};
    } else {
        doc["endemic"] = nullptr;
    }
    return doc;
}

} // namespace

std::string analysis_report_to_json(const AnalysisReport& report, int indent) {
    return report_to_json(report).dump(indent) + "\n";
}

std::string combined_analysis_to_json(const std::string& label,
                                      const AnalysisReport& treatment_free,
                                      const AnalysisReport& treatment, int indent) {
    json doc;
    doc["label"] = label;
    doc["treatment_free"] = report_to_json(treatment_free);
    doc["treatment"] = report_to_json(treatment);
    return doc.dump(indent) + "\n";
}

std::string fbs_result_to_json(const FbsResult& result, const FbsConfig& cfg,
                               double baseline_objective, int indent) {
    json doc;
    doc["converged"] = result.converged;
    doc["iterations"] = result.iterations;
    doc["objective"] = result.objective_history.empty() ? 0.0 : result.objective_history.back();
    doc["baseline_objective"] = baseline_objective;
    doc["objective_history"] = result.objective_history;
    doc["config"] = {{"relaxation", cfg.relaxation},
                     {"tol", cfg.tol},
                     {"max_iters", cfg.max_iters},
                     {"weights",
                      {{"b1", cfg.weights.b1},
                       {"b2", cfg.weights.b2},
                       {"w1", cfg.weights.w1},
                       {"w2", cfg.weights.w2},
                       {"w3", cfg.weights.w3}}},
                     {"bounds", {{"lower", cfg.bounds.lower}, {"upper", cfg.bounds.upper}}},
                     {"grid", {{"t0", cfg.grid.t0}, {"tf", cfg.grid.tf}, {"n_steps", cfg.grid.n_steps}}}};
    return doc.dump(indent) + "\n";
}

} // namespace nipah
