#include "cevsv/error.hpp"

#include <sstream>

namespace cevsv {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Pole: return "pole";
    case ErrorKind::Overflow: return "overflow";
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::Order: return "order";
    case ErrorKind::BranchMismatch: return "branch-mismatch";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Stability: return "stability";
    case ErrorKind::ConfigParse: return "config-parse";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

const char* to_string(Violation::Code code) noexcept {
    using C = Violation::Code;
    switch (code) {
    case C::GammaZero: return "gamma-zero";
    case C::EpsilonNonPositive: return "epsilon-nonpositive";
    case C::ThetaNegative: return "theta-negative";
    case C::MomentOrderInvalid: return "moment-order-invalid";
    case C::MomentRangeTable: return "moment-range";
    case C::GammaBelowMinusOne: return "gamma-below-minus-one";
    case C::CoefficientPairMismatch: return "coefficient-pair-mismatch";
    case C::MeanReversionSign: return "mean-reversion-sign";
    case C::MomentIntegralDiverges: return "moment-integral-diverges";
    }
    return "unknown";
}

namespace {

std::string join(const std::vector<Violation>& violations) {
    std::ostringstream os;
    os << "model fails closed-form pricing requirements:";
    for (const auto& v : violations) {
        os << "\n  [" << to_string(v.code) << "] " << v.message;
    }
    return os.str();
}

} // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(ErrorKind::Validation, join(violations)), violations_(std::move(violations)) {}

} // namespace cevsv
