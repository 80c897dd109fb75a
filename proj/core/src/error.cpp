#include "mmsvc/error.hpp"

namespace mmsvc {

std::string_view to_string(ErrorCategory category) noexcept {
    switch (category) {
        case ErrorCategory::invalid_argument: return "invalid argument";
        case ErrorCategory::config: return "config error";
        case ErrorCategory::history_underrun: return "history underrun";
        case ErrorCategory::normalization_required: return "normalization required";
        case ErrorCategory::ill_conditioned: return "ill-conditioned controller solve";
        case ErrorCategory::plant_diverged: return "plant diverged";
        case ErrorCategory::monitor_violation: return "monitor violation";
        case ErrorCategory::io: return "i/o error";
    }
    return "unknown";
}

namespace {

std::string decorate(ErrorCategory category, const std::string& message,
                     std::optional<std::int64_t> sample) {
    std::string out(to_string(category));
    out += ": ";
    out += message;
    if (sample) {
        out += " (sample " + std::to_string(*sample) + ")";
    }
    return out;
}

} // namespace

Error::Error(ErrorCategory category, const std::string& message,
             std::optional<std::int64_t> sample)
    : std::runtime_error(decorate(category, message, sample)),
      category_(category),
      sample_(sample) {}

void fail(ErrorCategory category, const std::string& message,
          std::optional<std::int64_t> sample) {
    throw Error(category, message, sample);
}

} // namespace mmsvc
