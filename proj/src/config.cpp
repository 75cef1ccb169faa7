#include "udw/config.hpp"

#include <cmath>
#include <optional>
#include <set>

#include "json.hpp"

#include "udw/error.hpp"

namespace udw {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& key, const std::string& message) { throw ConfigError(key + ": " + message); }

// View of one JSON object that remembers which keys were read, so that
// finish() can reject the rest.
class Object {
public:
    Object(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
        if (!j.is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
    }

    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    const json* find(const std::string& k) {
        const auto it = j_->find(k);
        if (it == j_->end()) return nullptr;
        seen_.insert(k);
        return &*it;
    }

    std::optional<double> number(const std::string& k) {
        const json* v = find(k);
        if (!v) return std::nullopt;
        if (!v->is_number()) fail(key(k), "expected a number");
        const double d = v->get<double>();
        if (!std::isfinite(d)) fail(key(k), "must be finite");
        return d;
    }

    std::optional<std::size_t> count(const std::string& k) {
        const json* v = find(k);
        if (!v) return std::nullopt;
        if (!v->is_number_integer()) fail(key(k), "expected a nonnegative integer");
        if (v->is_number_unsigned()) return v->get<std::size_t>();
        if (v->get<long long>() < 0) fail(key(k), "expected a nonnegative integer");
        return static_cast<std::size_t>(v->get<long long>());
    }

    std::optional<int> integer(const std::string& k) {
        const json* v = find(k);
        if (!v) return std::nullopt;
        if (!v->is_number_integer()) fail(key(k), "expected an integer");
        return v->get<int>();
    }

    std::optional<bool> boolean(const std::string& k) {
        const json* v = find(k);
        if (!v) return std::nullopt;
        if (!v->is_boolean()) fail(key(k), "expected true or false");
        return v->get<bool>();
    }

    std::optional<std::string> string(const std::string& k) {
        const json* v = find(k);
        if (!v) return std::nullopt;
        if (!v->is_string()) fail(key(k), "expected a string");
        return v->get<std::string>();
    }

    std::optional<Object> object(const std::string& k) {
        const json* v = find(k);
        if (!v) return std::nullopt;
        return Object(*v, key(k));
    }

    void finish() const {
        for (const auto& [k, v] : j_->items()) {
            if (!seen_.count(k)) fail(key(k), "unknown key");
        }
    }

private:
    const json* j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::optional<Measure> measure_from_string(const std::string& s) {
    for (Measure m : {Measure::e_n, Measure::mi, Measure::d12, Measure::d21, Measure::p_excite}) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

Scenario inline_defaults() {
    Scenario s;
    s.name = "custom";
    s.system.cavity = CavitySpec{};
    s.sweep = {"", 0.0, 0.0, 1};
    s.time = TimeAxis{};
    s.measures = {Measure::e_n, Measure::mi, Measure::d12, Measure::d21};
    return s;
}

void positive(const Object& o, const std::string& k, double v) {
    if (!(v > 0.0)) fail(o.key(k), "must be positive");
}

void parse_cavity(Object o, CavitySpec& c) {
    if (auto v = o.number("length")) {
        positive(o, "length", *v);
        c.length = *v;
    }
    bool boundary_set = false;
    if (auto b = o.string("boundary")) {
        if (*b == "periodic") {
            c.boundary = Boundary::periodic;
        } else if (*b == "reflecting") {
            c.boundary = Boundary::reflecting;
        } else {
            fail(o.key("boundary"), "must be \"periodic\" or \"reflecting\"");
        }
        boundary_set = true;
    }
    if (auto n = o.count("modes")) {
        if (*n == 0) fail(o.key("modes"), "must be at least 1");
        c.mode_count = *n;
    }
    if (auto neg = o.boolean("negative_modes")) {
        c.include_negative_modes = *neg;
    } else if (boundary_set) {
        c.include_negative_modes = c.boundary == Boundary::periodic;
    }
    if (c.boundary == Boundary::reflecting && c.include_negative_modes) {
        fail(o.key("negative_modes"), "only periodic cavities have negative modes");
    }
    o.finish();
}

void parse_worldline(Object o, Worldline& w) {
    if (auto t = o.string("type")) {
        if (*t == "stationary") {
            w.kind = Worldline::Kind::stationary;
        } else if (*t == "accelerated") {
            w.kind = Worldline::Kind::uniform_acceleration;
        } else {
            fail(o.key("type"), "must be \"stationary\" or \"accelerated\"");
        }
    }
    if (auto x = o.number("position")) w.position = *x;
    const auto a = o.number("acceleration");
    const auto dir = o.integer("direction");
    if (w.kind == Worldline::Kind::stationary) {
        if (a) fail(o.key("acceleration"), "only valid for accelerated worldlines");
        if (dir) fail(o.key("direction"), "only valid for accelerated worldlines");
        w.acceleration = 0.0;
        w.direction = 1;
    } else {
        if (a) {
            if (!(*a >= 0.0)) fail(o.key("acceleration"), "must be nonnegative");
            w.acceleration = *a;
        }
        if (dir) {
            if (*dir != 1 && *dir != -1) fail(o.key("direction"), "must be 1 or -1");
            w.direction = *dir;
        }
    }
    o.finish();
}

void parse_coupling(Object o, SwitchingFunction& f) {
    if (auto t = o.string("type")) {
        if (*t == "gaussian") {
            f.kind = SwitchingFunction::Kind::gaussian;
        } else if (*t == "constant") {
            f.kind = SwitchingFunction::Kind::constant;
        } else {
            fail(o.key("type"), "must be \"gaussian\" or \"constant\"");
        }
    }
    if (auto l = o.number("lambda0")) f.lambda0 = *l;
    const auto tau0 = o.number("tau0");
    const auto width = o.number("width");
    if (f.kind == SwitchingFunction::Kind::constant) {
        if (tau0) fail(o.key("tau0"), "only valid for gaussian switching");
        if (width) fail(o.key("width"), "only valid for gaussian switching");
        f.tau0 = 0.0;
        f.width = 1.0;
    } else {
        if (tau0) f.tau0 = *tau0;
        if (width) {
            positive(o, "width", *width);
            f.width = *width;
        }
    }
    o.finish();
}

void parse_detector(Object o, DetectorSpec& d) {
    if (auto f = o.number("frequency")) {
        positive(o, "frequency", *f);
        d.frequency = *f;
    }
    if (auto r = o.number("squeezing")) d.squeezing = *r;
    if (auto w = o.object("worldline")) parse_worldline(std::move(*w), d.worldline);
    if (auto c = o.object("coupling")) parse_coupling(std::move(*c), d.coupling);
    o.finish();
}

void parse_field(Object o, FieldInitial& f) {
    if (auto i = o.string("initial")) {
        if (*i == "vacuum") {
            f = FieldInitial::vacuum();
        } else if (*i == "thermal") {
            f.kind = FieldInitial::Kind::thermal;
        } else {
            fail(o.key("initial"), "must be \"vacuum\" or \"thermal\"");
        }
    }
    if (auto t = o.number("temperature")) {
        if (f.kind == FieldInitial::Kind::vacuum && o.find("initial")) {
            fail(o.key("temperature"), "only valid for a thermal field");
        }
        if (!(*t >= 0.0)) fail(o.key("temperature"), "must be nonnegative");
        f = FieldInitial::thermal(*t);
    }
    o.finish();
}

void parse_integrator(Object o, IntegratorConfig& c) {
    if (auto m = o.string("method")) {
        if (*m == "rk4") {
            c.method = IntegrationMethod::rk4;
        } else if (*m == "rk45") {
            c.method = IntegrationMethod::adaptive_rk45;
        } else {
            fail(o.key("method"), "must be \"rk4\" or \"rk45\"");
        }
    }
    const std::pair<const char*, double*> fields[] = {{"step", &c.step},
                                                      {"tolerance", &c.drift_tolerance},
                                                      {"relative_tolerance", &c.relative_tolerance},
                                                      {"absolute_tolerance", &c.absolute_tolerance},
                                                      {"min_step", &c.min_step}};
    for (const auto& [k, target] : fields) {
        if (auto v = o.number(k)) {
            positive(o, k, *v);
            *target = *v;
        }
    }
    o.finish();
}

void parse_sweep(Object o, SweepAxis& s) {
    if (auto p = o.string("param")) {
        validate_sweep_parameter(*p);
        s.parameter = *p;
    }
    if (auto v = o.number("min")) s.min = *v;
    if (auto v = o.number("max")) s.max = *v;
    if (auto n = o.count("points")) {
        if (*n == 0) fail(o.key("points"), "must be at least 1");
        s.points = *n;
    }
    if (s.parameter.empty() && s.points != 1) fail(o.key("points"), "must be 1 without a sweep parameter");
    if (s.points > 1 && !(s.max > s.min)) fail(o.key("max"), "must exceed sweep.min");
    if (s.points == 1 && o.find("max") == nullptr) s.max = s.min;
    o.finish();
}

void parse_time(Object o, TimeAxis& t) {
    if (auto k = o.string("kind")) {
        if (*k == "coordinate") {
            t.kind = TimeKind::coordinate;
        } else if (*k == "proper") {
            t.kind = TimeKind::proper;
        } else {
            fail(o.key("kind"), "must be \"coordinate\" or \"proper\"");
        }
    }
    if (auto d = o.count("detector")) {
        if (t.kind != TimeKind::proper) fail(o.key("detector"), "only valid for proper time");
        if (*d > 1) fail(o.key("detector"), "must be 0 or 1");
        t.reference_detector = *d;
    }
    if (t.kind == TimeKind::coordinate) t.reference_detector = 0;
    if (auto m = o.number("max")) {
        positive(o, "max", *m);
        t.max = *m;
    }
    if (auto n = o.count("samples")) {
        if (*n == 0) fail(o.key("samples"), "must be at least 1");
        t.samples = *n;
    }
    o.finish();
}

void check_name(const std::string& key, const std::string& name) {
    if (name.empty()) fail(key, "must not be empty");
    if (name.find_first_of(",\n\r\"") != std::string::npos) fail(key, "must not contain commas, quotes or newlines");
}

const char* boundary_name(Boundary b) { return b == Boundary::periodic ? "periodic" : "reflecting"; }

json render_detector(const DetectorSpec& d) {
    json w;
    if (d.worldline.kind == Worldline::Kind::stationary) {
        w["type"] = "stationary";
        w["position"] = d.worldline.position;
    } else {
        w["type"] = "accelerated";
        w["acceleration"] = d.worldline.acceleration;
        w["position"] = d.worldline.position;
        w["direction"] = d.worldline.direction;
    }
    json c;
    if (d.coupling.kind == SwitchingFunction::Kind::constant) {
        c["type"] = "constant";
        c["lambda0"] = d.coupling.lambda0;
    } else {
        c["type"] = "gaussian";
        c["lambda0"] = d.coupling.lambda0;
        c["tau0"] = d.coupling.tau0;
        c["width"] = d.coupling.width;
    }
    json j;
    j["frequency"] = d.frequency;
    j["squeezing"] = d.squeezing;
    j["worldline"] = std::move(w);
    j["coupling"] = std::move(c);
    return j;
}

}  // namespace

RunConfig default_config(const std::string& scenario) {
    auto s = find_scenario(scenario);
    if (!s) fail("scenario", "unknown scenario '" + scenario + "'");
    RunConfig c;
    c.base = scenario;
    c.scenario = std::move(*s);
    return c;
}

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    if (doc.is_null()) doc = json::object();
    Object root(doc, "");

    RunConfig c;
    if (auto name = root.string("scenario")) {
        c = default_config(*name);
    } else {
        c.scenario = inline_defaults();
    }
    Scenario& sc = c.scenario;
    if (auto n = root.string("name")) {
        check_name("name", *n);
        sc.name = *n;
    }
    if (auto d = root.string("description")) sc.description = *d;
    if (const json* m = root.find("measures")) {
        if (!m->is_array() || m->empty()) fail("measures", "expected a nonempty array of measure names");
        sc.measures.clear();
        for (std::size_t i = 0; i < m->size(); ++i) {
            const std::string key = "measures[" + std::to_string(i) + "]";
            if (!(*m)[i].is_string()) fail(key, "expected a string");
            const auto parsed = measure_from_string((*m)[i].get<std::string>());
            if (!parsed) fail(key, "unknown measure '" + (*m)[i].get<std::string>() + "'");
            sc.measures.push_back(*parsed);
        }
    }

    if (auto o = root.object("cavity")) parse_cavity(std::move(*o), sc.system.cavity);
    if (const json* arr = root.find("detectors")) {
        if (!arr->is_array()) fail("detectors", "expected an array");
        for (std::size_t i = 0; i < arr->size(); ++i) {
            if (i >= sc.system.detectors.size()) sc.system.detectors.emplace_back();
            parse_detector(Object((*arr)[i], "detectors[" + std::to_string(i) + "]"), sc.system.detectors[i]);
        }
    }
    if (sc.system.detectors.size() != 2) fail("detectors", "exactly two detectors are required");
    for (auto& d : sc.system.detectors) {
        if (!d.mode_coupling_scale.empty() && d.mode_coupling_scale.size() != sc.system.cavity.mode_count) {
            d.mode_coupling_scale.clear();
        }
    }
    if (auto o = root.object("field")) parse_field(std::move(*o), sc.system.field);
    if (auto o = root.object("integrator")) parse_integrator(std::move(*o), c.integrator);
    if (auto o = root.object("sweep")) parse_sweep(std::move(*o), sc.sweep);
    if (auto o = root.object("time")) parse_time(std::move(*o), sc.time);
    if (auto o = root.object("output")) {
        if (auto p = o->string("path")) c.output_path = *p;
        o->finish();
    }
    if (auto w = root.count("workers")) c.workers = *w;
    if (auto o = root.object("options")) {
        if (auto b = o->boolean("paper_literal_discord")) {
            c.discord = *b ? DiscordFormula::paper_literal : DiscordFormula::corrected;
        }
        o->finish();
    }
    root.finish();

    validate_run_config(c);
    return c;
}

void validate_run_config(const RunConfig& c) {
    const Scenario& sc = c.scenario;
    if (sc.system.detectors.size() != 2) fail("detectors", "exactly two detectors are required");
    if (sc.time.kind == TimeKind::proper && sc.time.reference_detector >= sc.system.detectors.size()) {
        fail("time.detector", "out of range");
    }
    validate_sweep_parameter(sc.sweep.parameter);
    const auto values = sc.sweep.values();
    for (double v : {values.front(), values.back()}) {
        const std::string where =
            sc.sweep.parameter.empty() ? std::string("config") : "sweep (" + sc.sweep.parameter + " = " + format_double(v) + ")";
        try {
            const SystemSpec s = apply_sweep(sc.system, sc.sweep.parameter, v);
            s.validate();
            const auto times = sample_coordinate_times(s, sc.time);
            s.check_inside(times.empty() ? 0.0 : times.back());
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            fail(where, e.what());
        }
    }
}

std::string render_config(const RunConfig& c) {
    const Scenario& sc = c.scenario;
    json j;
    if (!c.base.empty()) j["scenario"] = c.base;
    j["name"] = sc.name;
    j["description"] = sc.description;
    json measures = json::array();
    for (Measure m : sc.measures) measures.push_back(to_string(m));
    j["measures"] = std::move(measures);

    const auto& cav = sc.system.cavity;
    j["cavity"] = {{"length", cav.length},
                   {"boundary", boundary_name(cav.boundary)},
                   {"modes", cav.mode_count},
                   {"negative_modes", cav.include_negative_modes}};
    json dets = json::array();
    for (const auto& d : sc.system.detectors) dets.push_back(render_detector(d));
    j["detectors"] = std::move(dets);
    if (sc.system.field.kind == FieldInitial::Kind::thermal) {
        j["field"] = {{"initial", "thermal"}, {"temperature", sc.system.field.temperature}};
    } else {
        j["field"] = {{"initial", "vacuum"}};
    }
    const auto& in = c.integrator;
    j["integrator"] = {{"method", in.method == IntegrationMethod::rk4 ? "rk4" : "rk45"},
                       {"step", in.step},
                       {"tolerance", in.drift_tolerance},
                       {"relative_tolerance", in.relative_tolerance},
                       {"absolute_tolerance", in.absolute_tolerance},
                       {"min_step", in.min_step}};
    j["sweep"] = {{"param", sc.sweep.parameter}, {"min", sc.sweep.min}, {"max", sc.sweep.max}, {"points", sc.sweep.points}};
    json time = {{"kind", sc.time.kind == TimeKind::coordinate ? "coordinate" : "proper"}};
    if (sc.time.kind == TimeKind::proper) time["detector"] = sc.time.reference_detector;
    time["max"] = sc.time.max;
    time["samples"] = sc.time.samples;
    j["time"] = std::move(time);
    j["output"] = {{"path", c.output_path}};
    j["workers"] = c.workers;
    j["options"] = {{"paper_literal_discord", c.discord == DiscordFormula::paper_literal}};
    return j.dump(2) + "\n";
}

}  // namespace udw
