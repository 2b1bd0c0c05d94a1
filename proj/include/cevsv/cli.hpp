#pragma once

#include "cevsv/model.hpp"
#include "cevsv/pricing.hpp"

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace cevsv::cli {

enum ExitCode : int {
    kOk = 0,
    kVerifyFailed = 1,
    kParseError = 2,
    kValidationError = 3,
    kNumericError = 4,
    kIoError = 5,
};

/// Flat `key = value` configuration; `#` starts a comment.
class Config {
public:
    static Config parse(std::istream& in, const std::string& source);
    static Config load(const std::string& path);

    /// Later entries win.
    void merge(const Config& other);
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const;

    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

/// Built-in presets (fig1, fig2, fig3) compiled from configs/.
std::optional<std::string> preset_text(const std::string& name);
std::vector<std::string> preset_names();

/// "standard", "constant:c", "exp_decay:scale,rate" or "tabulated:t1:v1;t2:v2;...".
CoefficientFn parse_coefficient(const std::string& text, bool is_q, double gamma, double theta, double epsilon);

Branch parse_branch(const std::string& text);

struct Instrument {
    enum class Kind { VarianceSwap, VolatilitySwap, MomentSwap, Option };
    enum class VolMode { Paper, Oracle };
    Kind kind = Kind::VarianceSwap;
    int order = 2;
    double strike = 0.0;
    double rate = 0.0;
    Payoff payoff = Payoff::Call;
    VolMode vol_mode = VolMode::Paper;

    /// Tokens as on the command line: "var-swap", "vol-swap", "moment-swap 3",
    /// "option 2 0.04 0.01 call".
    static Instrument parse(const std::vector<std::string>& tokens);
    std::string describe() const;
};

struct RunConfig {
    Branch branch = Branch::MNeg2Gamma;
    double gamma = -0.6;
    double theta = 0.1;
    double epsilon = 0.1;
    std::string q = "standard";
    std::string l = "standard";
    double T = 0.5;
    double x = 0.2;
    Instrument instrument;
    std::uint64_t seed = 20240501;
    long n_paths = 100000;
    int n_steps = 1000;

    static RunConfig from(const Config& cfg);
    ModelSpec model_spec() const;
};

struct PriceResult {
    double value;
    double error_estimate;
    bool flagged;
    std::string note;
};

/// Validates the spec for the instrument and prices it.
PriceResult price(const RunConfig& run, const Instrument& inst);

struct Axis {
    enum class Var { Gamma, T, X };
    Var var;
    double lo;
    double hi;
    int n;

    /// "gamma:-0.95:-0.05:20", "T:0.05:1:20" or "x:0.05:1:20".
    static Axis parse(const std::string& text);
    double at(int k) const;
};

struct GridRequest {
    RunConfig base;
    Axis axis1;
    Axis axis2;
    std::optional<std::string> output_path;
};

struct SurfaceRow {
    double axis1;
    double axis2;
    double value;
    /// "ok", "flagged", "validation", "numeric" or "domain".
    std::string flag;
};

/// Rows in axis1-major order; failed points are flagged, never fatal.
std::vector<SurfaceRow> surface(const GridRequest& req);

void write_surface_csv(std::ostream& os, const std::vector<SurfaceRow>& rows);

/// Entry point of the `cevsv` executable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace cevsv::cli
