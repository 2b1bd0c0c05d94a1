#include "cevsv/cli.hpp"

#include "cevsv/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace cevsv::cli {

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "branch", "gamma",  "theta", "epsilon", "q",     "l",       "T",       "x",  "instrument", "moment",
        "strike", "rate",   "payoff", "vol_mode", "axis1", "axis2", "seed", "n_paths", "n_steps", "mu", "output"};
    return keys;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

double to_double(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    double v = 0.0;
    const char* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (t.empty() || ec != std::errc() || ptr != end) {
        throw Error(ErrorKind::ConfigParse, what + ": not a number: '" + text + "'");
    }
    return v;
}

long to_long(const std::string& text, const std::string& what) {
    const double v = to_double(text, what);
    if (v != std::floor(v) || std::abs(v) > 9e15) {
        throw Error(ErrorKind::ConfigParse, what + ": not an integer: '" + text + "'");
    }
    return static_cast<long>(v);
}

std::string format(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

bool is_numeric_kind(ErrorKind k) {
    return k == ErrorKind::Convergence || k == ErrorKind::Overflow || k == ErrorKind::Stability ||
           k == ErrorKind::Pole;
}

} // namespace

// ---- Config ----------------------------------------------------------------

Config Config::parse(std::istream& in, const std::string& source) {
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = source + ":" + std::to_string(lineno);
        if (eq == std::string::npos) throw Error(ErrorKind::ConfigParse, where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!known_keys().count(key)) throw Error(ErrorKind::ConfigParse, where + ": unknown key '" + key + "'");
        if (value.empty()) throw Error(ErrorKind::ConfigParse, where + ": empty value for '" + key + "'");
        cfg.entries_[key] = value;
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read config file '" + path + "'");
    return parse(in, path);
}

void Config::merge(const Config& other) {
    for (const auto& [k, v] : other.entries_) entries_[k] = v;
}

void Config::set(const std::string& key, const std::string& value) {
    if (!known_keys().count(key)) throw Error(ErrorKind::ConfigParse, "unknown key '" + key + "'");
    entries_[key] = value;
}

std::optional<std::string> Config::get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto v = get(key);
    return v ? to_double(*v, key) : fallback;
}

long Config::get_long(const std::string& key, long fallback) const {
    const auto v = get(key);
    return v ? to_long(*v, key) : fallback;
}

std::vector<double> Config::get_list(const std::string& key, std::vector<double> fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::vector<double> out;
    for (const auto& item : split(*v, ',')) out.push_back(to_double(item, key));
    return out;
}

// ---- Parsing helpers -------------------------------------------------------

Branch parse_branch(const std::string& text) {
    if (text == "m_neg2gamma") return Branch::MNeg2Gamma;
    if (text == "m_gamma") return Branch::MGamma;
    if (text == "m_neg_gamma") return Branch::MNegGamma;
    throw Error(ErrorKind::ConfigParse, "branch must be m_neg2gamma, m_gamma or m_neg_gamma, got '" + text + "'");
}

CoefficientFn parse_coefficient(const std::string& text, bool is_q, double gamma, double theta, double epsilon) {
    const std::string what = is_q ? "q" : "l";
    if (text == "standard") {
        return is_q ? CoefficientFn::constant(-theta) : CoefficientFn::exp_decay(epsilon, theta * gamma);
    }
    const auto colon = text.find(':');
    if (colon == std::string::npos) return CoefficientFn::constant(to_double(text, what));
    const std::string kind = text.substr(0, colon);
    const std::string body = text.substr(colon + 1);
    try {
        if (kind == "constant") return CoefficientFn::constant(to_double(body, what));
        if (kind == "exp_decay") {
            const auto parts = split(body, ',');
            if (parts.size() != 2) throw Error(ErrorKind::ConfigParse, what + ": exp_decay needs scale,rate");
            return CoefficientFn::exp_decay(to_double(parts[0], what), to_double(parts[1], what));
        }
        if (kind == "tabulated") {
            std::vector<std::pair<double, double>> knots;
            for (const auto& knot : split(body, ';')) {
                const auto tv = split(knot, ':');
                if (tv.size() != 2) throw Error(ErrorKind::ConfigParse, what + ": tabulated knots are t:v");
                knots.emplace_back(to_double(tv[0], what), to_double(tv[1], what));
            }
            return CoefficientFn::tabulated(std::move(knots));
        }
    } catch (const ValidationError&) {
        throw;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ConfigParse) throw;
        throw Error(ErrorKind::ConfigParse, what + ": " + e.what());
    }
    throw Error(ErrorKind::ConfigParse, what + ": unknown coefficient form '" + kind + "'");
}

Instrument Instrument::parse(const std::vector<std::string>& tokens) {
    if (tokens.empty()) throw Error(ErrorKind::ConfigParse, "instrument: missing kind");
    Instrument inst;
    const std::string& kind = tokens[0];
    auto arg = [&](std::size_t k) -> const std::string& {
        if (k >= tokens.size()) throw Error(ErrorKind::ConfigParse, "instrument '" + kind + "': missing argument");
        return tokens[k];
    };
    std::size_t used = 1;
    if (kind == "var-swap") {
        inst.kind = Kind::VarianceSwap;
        inst.order = 2;
    } else if (kind == "moment-swap") {
        inst.kind = Kind::MomentSwap;
        inst.order = static_cast<int>(to_long(arg(1), "moment order"));
        used = 2;
    } else if (kind == "vol-swap") {
        inst.kind = Kind::VolatilitySwap;
        inst.order = 1;
        if (tokens.size() > 1) {
            if (tokens[1] == "paper") inst.vol_mode = VolMode::Paper;
            else if (tokens[1] == "oracle") inst.vol_mode = VolMode::Oracle;
            else throw Error(ErrorKind::ConfigParse, "vol-swap mode must be paper or oracle");
            used = 2;
        }
    } else if (kind == "option") {
        inst.kind = Kind::Option;
        inst.order = static_cast<int>(to_long(arg(1), "option moment order"));
        inst.strike = to_double(arg(2), "option strike");
        inst.rate = to_double(arg(3), "option rate");
        used = 4;
        if (tokens.size() > 4) {
            if (tokens[4] == "call") inst.payoff = Payoff::Call;
            else if (tokens[4] == "put") inst.payoff = Payoff::Put;
            else throw Error(ErrorKind::ConfigParse, "option payoff must be call or put");
            used = 5;
        }
    } else {
        throw Error(ErrorKind::ConfigParse,
                    "instrument must be var-swap, vol-swap, moment-swap or option, got '" + kind + "'");
    }
    if (tokens.size() > used) throw Error(ErrorKind::ConfigParse, "instrument '" + kind + "': too many arguments");
    return inst;
}

std::string Instrument::describe() const {
    std::ostringstream os;
    switch (kind) {
    case Kind::VarianceSwap: os << "var-swap order=2"; break;
    case Kind::MomentSwap: os << "moment-swap order=" << order; break;
    case Kind::VolatilitySwap: os << "vol-swap mode=" << (vol_mode == VolMode::Paper ? "paper" : "oracle"); break;
    case Kind::Option:
        os << "option order=" << order << " strike=" << format(strike) << " rate=" << format(rate)
           << " payoff=" << to_string(payoff);
        break;
    }
    return os.str();
}

RunConfig RunConfig::from(const Config& cfg) {
    RunConfig r;
    if (auto b = cfg.get("branch")) r.branch = parse_branch(*b);
    r.gamma = cfg.get_double("gamma", r.gamma);
    r.theta = cfg.get_double("theta", r.theta);
    r.epsilon = cfg.get_double("epsilon", r.epsilon);
    r.q = cfg.get("q").value_or(r.q);
    r.l = cfg.get("l").value_or(r.l);
    r.T = cfg.get_double("T", r.T);
    r.x = cfg.get_double("x", r.x);
    const long seed = cfg.get_long("seed", static_cast<long>(r.seed));
    if (seed < 0) throw Error(ErrorKind::ConfigParse, "seed must be non-negative");
    r.seed = static_cast<std::uint64_t>(seed);
    r.n_paths = cfg.get_long("n_paths", r.n_paths);
    r.n_steps = static_cast<int>(cfg.get_long("n_steps", r.n_steps));
    if (auto kind = cfg.get("instrument")) {
        std::vector<std::string> tokens{*kind};
        if (*kind == "moment-swap") tokens.push_back(cfg.get("moment").value_or("1"));
        if (*kind == "vol-swap") tokens.push_back(cfg.get("vol_mode").value_or("paper"));
        if (*kind == "option") {
            tokens.push_back(cfg.get("moment").value_or("1"));
            tokens.push_back(cfg.get("strike").value_or("0"));
            tokens.push_back(cfg.get("rate").value_or("0"));
            tokens.push_back(cfg.get("payoff").value_or("call"));
        }
        r.instrument = Instrument::parse(tokens);
    }
    return r;
}

ModelSpec RunConfig::model_spec() const {
    return ModelSpec(branch, gamma, theta, epsilon, parse_coefficient(q, true, gamma, theta, epsilon),
                     parse_coefficient(l, false, gamma, theta, epsilon));
}

// ---- Pricing dispatch ------------------------------------------------------

PriceResult price(const RunConfig& run, const Instrument& inst) {
    const ModelSpec spec = run.model_spec();
    if (spec.branch() == Branch::MNegGamma) require_valid(spec, inst.order);
    auto from_swap = [](const SwapQuote& q) { return PriceResult{q.value, q.quadrature_error, q.flagged, q.note}; };
    switch (inst.kind) {
    case Instrument::Kind::VarianceSwap:
    case Instrument::Kind::MomentSwap:
        if (spec.branch() == Branch::MGamma) return from_swap(moment_swap_m_gamma(spec, run.T, run.x, inst.order));
        return from_swap(variance_swap_fair_strike(spec, run.T, run.x, inst.order));
    case Instrument::Kind::VolatilitySwap: {
        if (spec.branch() == Branch::MGamma) {
            const SwapQuote v1 = moment_swap_m_gamma(spec, run.T, run.x, 1);
            return from_swap(volatility_swap_from_variance(spec, run.T, run.x, v1.value, 0.0, 0.0));
        }
        if (inst.vol_mode == Instrument::VolMode::Paper) {
            return from_swap(volatility_swap_fair_strike(spec, run.T, run.x));
        }
        SimulationRequest req;
        req.n_paths = run.n_paths;
        req.n_steps = run.n_steps;
        req.seed = run.seed;
        const VolSwapOracle o = volatility_swap_oracle(spec, run.T, run.x, req);
        PriceResult r = from_swap(o.quote);
        r.note = "mc variance=" + format(o.mc_variance) + " mc E[V]=" + format(o.mc_mean);
        return r;
    }
    case Instrument::Kind::Option: {
        const OptionQuote q =
            option_on_moment_swap(spec, run.T, run.x, inst.order, inst.strike, inst.rate, inst.payoff);
        return {q.value, q.quadrature_error, q.flagged, std::string("method=") + to_string(q.method)};
    }
    }
    return {};
}

// ---- Surfaces --------------------------------------------------------------

Axis Axis::parse(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 4) throw Error(ErrorKind::ConfigParse, "axis must be name:lo:hi:n, got '" + text + "'");
    Axis a{};
    if (parts[0] == "gamma") a.var = Var::Gamma;
    else if (parts[0] == "T") a.var = Var::T;
    else if (parts[0] == "x") a.var = Var::X;
    else throw Error(ErrorKind::ConfigParse, "axis variable must be gamma, T or x, got '" + parts[0] + "'");
    a.lo = to_double(parts[1], "axis");
    a.hi = to_double(parts[2], "axis");
    a.n = static_cast<int>(to_long(parts[3], "axis"));
    if (a.n < 1) throw Error(ErrorKind::ConfigParse, "axis needs at least one point");
    return a;
}

double Axis::at(int k) const { return n == 1 ? lo : lo + (hi - lo) * k / (n - 1); }

namespace {

void assign(RunConfig& r, Axis::Var v, double value) {
    switch (v) {
    case Axis::Var::Gamma: r.gamma = value; break;
    case Axis::Var::T: r.T = value; break;
    case Axis::Var::X: r.x = value; break;
    }
}

} // namespace

std::vector<SurfaceRow> surface(const GridRequest& req) {
    std::vector<SurfaceRow> rows;
    rows.reserve(static_cast<std::size_t>(req.axis1.n) * req.axis2.n);
    for (int i = 0; i < req.axis1.n; ++i) {
        for (int j = 0; j < req.axis2.n; ++j) {
            RunConfig r = req.base;
            const double a1 = req.axis1.at(i);
            const double a2 = req.axis2.at(j);
            assign(r, req.axis1.var, a1);
            assign(r, req.axis2.var, a2);
            SurfaceRow row{a1, a2, std::nan(""), "ok"};
            try {
                const PriceResult p = price(r, r.instrument);
                row.value = p.value;
                if (p.flagged || !std::isfinite(p.value)) row.flag = "flagged";
            } catch (const ValidationError&) {
                row.flag = "validation";
            } catch (const Error& e) {
                row.flag = is_numeric_kind(e.kind()) ? "numeric" : "domain";
            }
            rows.push_back(row);
        }
    }
    return rows;
}

void write_surface_csv(std::ostream& os, const std::vector<SurfaceRow>& rows) {
    os << "axis1,axis2,value,flag\n";
    for (const auto& r : rows) {
        os << format(r.axis1) << ',' << format(r.axis2) << ',' << format(r.value) << ',' << r.flag << '\n';
    }
}

// ---- Commands --------------------------------------------------------------

namespace {

int print_checks(const std::string& suite, const std::vector<CheckResult>& checks, std::ostream& out) {
    int failed = 0;
    int passed = 0;
    for (const auto& c : checks) {
        const char* tag = c.informational ? "INFO" : (c.passed ? "PASS" : "FAIL");
        out << tag << ' ' << c.name << ": measured=" << format(c.measured) << " tol=" << format(c.tolerance);
        if (c.informational) out << (c.passed ? " (holds)" : " (does not hold)");
        if (!c.detail.empty()) out << "  [" << c.detail << ']';
        out << '\n';
        if (c.informational) continue;
        (c.passed ? passed : failed) += 1;
    }
    out << "verify " << suite << ": " << passed << " passed, " << failed << " failed\n";
    return failed == 0 ? kOk : kVerifyFailed;
}

double constant_value(const Config& cfg, const std::string& key, double fallback) {
    const auto text = cfg.get(key);
    if (!text) return fallback;
    const CoefficientFn f = parse_coefficient(*text, key == "q", 1.0, 0.0, 1.0);
    if (const auto* c = std::get_if<CoefficientFn::Constant>(&f.kind())) return c->c;
    throw Error(ErrorKind::ConfigParse, "the laplace suite needs a constant " + key);
}

int cmd_verify(const std::string& suite, const Config& cfg, std::ostream& out) {
    if (suite == "density") return print_checks(suite, density_suite(), out);
    if (suite == "pde") return print_checks(suite, pde_suite(), out);
    if (suite == "laplace") {
        LaplaceSuiteOptions o;
        o.gamma = cfg.get_double("gamma", o.gamma);
        o.q = constant_value(cfg, "q", o.q);
        o.l = constant_value(cfg, "l", o.l);
        o.x0 = cfg.get_double("x", o.x0);
        o.tau = cfg.get_double("T", o.tau);
        o.mus = cfg.get_list("mu", o.mus);
        o.n_paths = cfg.get_long("n_paths", o.n_paths);
        o.n_steps = static_cast<int>(cfg.get_long("n_steps", o.n_steps));
        o.seed = static_cast<std::uint64_t>(cfg.get_long("seed", static_cast<long>(o.seed)));
        return print_checks(suite, laplace_suite(o), out);
    }
    TriangleOptions o;
    o.gamma = cfg.get_double("gamma", o.gamma);
    o.theta = cfg.get_double("theta", o.theta);
    o.epsilon = cfg.get_double("epsilon", o.epsilon);
    o.x0 = cfg.get_double("x", o.x0);
    o.tau = cfg.get_double("T", o.tau);
    if (cfg.has("moment")) {
        o.orders.clear();
        for (double v : cfg.get_list("moment", {})) o.orders.push_back(static_cast<int>(v));
    }
    o.n_paths = cfg.get_long("n_paths", o.n_paths);
    o.n_steps = static_cast<int>(cfg.get_long("n_steps", o.n_steps));
    o.seed = static_cast<std::uint64_t>(cfg.get_long("seed", static_cast<long>(o.seed)));
    return print_checks(suite, mc_triangle_suite(o), out);
}

void append_price_csv(const std::string& path, const RunConfig& run, const Instrument& inst, const PriceResult& p) {
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    std::ofstream os(path, std::ios::app);
    if (!os) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
    if (fresh) os << "instrument,branch,gamma,theta,epsilon,T,x,value,error_estimate,flag\n";
    os << '"' << inst.describe() << "\"," << to_string(run.branch) << ',' << format(run.gamma) << ','
       << format(run.theta) << ',' << format(run.epsilon) << ',' << format(run.T) << ',' << format(run.x) << ','
       << format(p.value) << ',' << format(p.error_estimate) << ',' << (p.flagged ? "flagged" : "ok") << '\n';
    if (!os) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
}

int cmd_price(const Config& cfg, const std::vector<std::string>& tokens, std::ostream& out, std::ostream& err) {
    const RunConfig run = RunConfig::from(cfg);
    const Instrument inst = tokens.empty() ? run.instrument : Instrument::parse(tokens);
    if (run.branch == Branch::MNeg2Gamma && run.gamma > 0.0) {
        err << "warning: gamma > 0; the m=-2gamma transition density is only formally valid here\n";
    }
    const PriceResult p = price(run, inst);
    out << "instrument: " << inst.describe() << '\n'
        << "model: branch=" << to_string(run.branch) << " gamma=" << format(run.gamma) << " theta=" << format(run.theta)
        << " epsilon=" << format(run.epsilon) << " q=" << run.q << " l=" << run.l << " T=" << format(run.T)
        << " x=" << format(run.x) << '\n'
        << "value: " << format(p.value) << '\n'
        << "error_estimate: " << format(p.error_estimate) << '\n'
        << "flag: " << (p.flagged ? "flagged" : "ok") << '\n';
    if (!p.note.empty()) out << "note: " << p.note << '\n';
    if (auto path = cfg.get("output")) append_price_csv(*path, run, inst, p);
    return p.flagged ? kNumericError : kOk;
}

int cmd_surface(const Config& cfg, std::ostream& out) {
    const auto a1 = cfg.get("axis1");
    const auto a2 = cfg.get("axis2");
    if (!a1 || !a2) throw Error(ErrorKind::ConfigParse, "surface needs axis1 and axis2 (see --preset)");
    GridRequest req{RunConfig::from(cfg), Axis::parse(*a1), Axis::parse(*a2), cfg.get("output")};
    const std::vector<SurfaceRow> rows = surface(req);
    if (!req.output_path) {
        write_surface_csv(out, rows);
        return kOk;
    }
    std::ostringstream buf;
    write_surface_csv(buf, rows);
    std::ofstream os(*req.output_path);
    if (!os) throw Error(ErrorKind::Io, "cannot write '" + *req.output_path + "'");
    os << buf.str();
    if (!os) throw Error(ErrorKind::Io, "cannot write '" + *req.output_path + "'");
    const auto bad = std::count_if(rows.begin(), rows.end(), [](const SurfaceRow& r) { return r.flag != "ok"; });
    out << "wrote " << rows.size() << " rows to " << *req.output_path << " (" << bad << " flagged)\n";
    return kOk;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Closed-form pricing and verification for mean-reverting CEV volatility models", "cevsv"};
    app.fallthrough();
    app.require_subcommand(1);
    std::string config_path;
    std::string preset;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "flat key = value config file");
    app.add_option("--preset", preset, "built-in config: fig1, fig2 or fig3");
    app.add_option("--seed", seed, "Monte Carlo seed");
    app.add_option("--out", out_path, "output file (CSV)");
    app.add_option("--set", overrides, "key=value override, repeatable")->allow_extra_args(false);

    std::vector<std::string> tokens;
    auto* price_cmd = app.add_subcommand("price", "price one instrument");
    price_cmd->add_option("instrument", tokens,
                          "var-swap | vol-swap [paper|oracle] | moment-swap <i> | option <n> <K> <r> [call|put]");
    auto* surface_cmd = app.add_subcommand("surface", "price a grid and write CSV");
    std::string suite;
    auto* verify_cmd = app.add_subcommand("verify", "run a verification suite");
    verify_cmd->add_option("suite", suite)->required()->check(
        CLI::IsMember({"density", "pde", "laplace", "mc-triangle"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kParseError;
    }

    try {
        Config cfg;
        if (!preset.empty()) {
            const auto text = preset_text(preset);
            if (!text) throw Error(ErrorKind::ConfigParse, "unknown preset '" + preset + "'");
            std::istringstream is(*text);
            cfg.merge(Config::parse(is, "preset:" + preset));
        }
        if (!config_path.empty()) cfg.merge(Config::load(config_path));
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw Error(ErrorKind::ConfigParse, "--set expects key=value");
            cfg.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
        }
        if (seed) cfg.set("seed", std::to_string(*seed));
        if (!out_path.empty()) cfg.set("output", out_path);

        if (*price_cmd) return cmd_price(cfg, tokens, out, err);
        if (*surface_cmd) return cmd_surface(cfg, out);
        return cmd_verify(suite, cfg, out);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kValidationError;
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        switch (e.kind()) {
        case ErrorKind::ConfigParse: return kParseError;
        case ErrorKind::Io: return kIoError;
        default: return is_numeric_kind(e.kind()) ? kNumericError : kValidationError;
        }
    }
}

} // namespace cevsv::cli
