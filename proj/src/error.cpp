#include "waveplatoon/error.hpp"

namespace waveplatoon {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroNumerator: return "ZeroNumerator";
    case ErrorCode::PoleAtProbe: return "PoleAtProbe";
    case ErrorCode::InfiniteDCGain: return "InfiniteDCGain";
    case ErrorCode::ImproperTF: return "ImproperTF";
    case ErrorCode::UnstablePoles: return "UnstablePoles";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::DegreeOverflow: return "DegreeOverflow";
    case ErrorCode::ExtrapolationMismatch: return "ExtrapolationMismatch";
    case ErrorCode::SampleRateMismatch: return "SampleRateMismatch";
    case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
  }
  return "Unknown";
}

}  // namespace waveplatoon
