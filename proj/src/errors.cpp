#include "jjosc/errors.hpp"

namespace jjosc {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Unlocked: return "Unlocked";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::NoOscillation: return "NoOscillation";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::Diverging: return "Diverging";
    case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorKind::NoPeak: return "NoPeak";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::EmptyBand: return "EmptyBand";
    case ErrorKind::PoorFit: return "PoorFit";
    case ErrorKind::AliasRisk: return "AliasRisk";
    case ErrorKind::Underdetermined: return "Underdetermined";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::NonMonotoneFrequencies: return "NonMonotoneFrequencies";
    case ErrorKind::ConfigParse: return "ConfigParse";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace jjosc
