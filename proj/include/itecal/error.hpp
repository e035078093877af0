#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace itecal {

enum class ErrorCode {
    EmptySample,
    FieldOutOfRange,
    SingleArmSample,
    MissingOrderKey,
    MissingBaselineRisk,
    DegenerateVariance,
    NegativeArgument,
    InvalidArgument,
    MissingColumn,
    BadValue,
    EmptyFile,
    EmptyPath,
    UnknownScenario,
    Io,
};

inline constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::EmptySample: return "EmptySample";
        case ErrorCode::FieldOutOfRange: return "FieldOutOfRange";
        case ErrorCode::SingleArmSample: return "SingleArmSample";
        case ErrorCode::MissingOrderKey: return "MissingOrderKey";
        case ErrorCode::MissingBaselineRisk: return "MissingBaselineRisk";
        case ErrorCode::DegenerateVariance: return "DegenerateVariance";
        case ErrorCode::NegativeArgument: return "NegativeArgument";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::BadValue: return "BadValue";
        case ErrorCode::EmptyFile: return "EmptyFile";
        case ErrorCode::EmptyPath: return "EmptyPath";
        case ErrorCode::UnknownScenario: return "UnknownScenario";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

// Every failure raised by the library. `module` names the layer that raised it
// (domain, risk_calib, ite_calib, inference, simulation, cli_io); `field` and
// `index` locate the offending input when there is one. For dataset errors
// `index` is the 1-based data row number.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string module, std::string detail,
          std::optional<std::string> field = std::nullopt,
          std::optional<std::size_t> index = std::nullopt)
        : std::runtime_error(compose(code, module, detail)),
          code_(code),
          module_(std::move(module)),
          field_(std::move(field)),
          index_(index) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& module() const noexcept { return module_; }
    const std::optional<std::string>& field() const noexcept { return field_; }
    std::optional<std::size_t> index() const noexcept { return index_; }

private:
    static std::string compose(ErrorCode code, const std::string& module, const std::string& detail) {
        std::string msg = module;
        msg += ": ";
        msg += to_string(code);
        if (!detail.empty()) {
            msg += ": ";
            msg += detail;
        }
        return msg;
    }

    ErrorCode code_;
    std::string module_;
    std::optional<std::string> field_;
    std::optional<std::size_t> index_;
};

}  // namespace itecal
