#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mmsvc {

enum class ErrorCategory {
    invalid_argument,
    config,
    history_underrun,
    normalization_required,
    ill_conditioned,
    plant_diverged,
    monitor_violation,
    io,
};

[[nodiscard]] std::string_view to_string(ErrorCategory category) noexcept;

/// Library-wide exception. Carries a category (mapped to CLI exit codes) and,
/// for simulation failures, the secondary sample index at which it occurred.
class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message,
          std::optional<std::int64_t> sample = std::nullopt);

    [[nodiscard]] ErrorCategory category() const noexcept { return category_; }
    [[nodiscard]] std::optional<std::int64_t> sample() const noexcept { return sample_; }

private:
    ErrorCategory category_;
    std::optional<std::int64_t> sample_;
};

[[noreturn]] void fail(ErrorCategory category, const std::string& message,
                       std::optional<std::int64_t> sample = std::nullopt);

} // namespace mmsvc
