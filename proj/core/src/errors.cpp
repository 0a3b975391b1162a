#include "creditband/errors.hpp"

namespace creditband {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SpendExceedsBudget: return "SpendExceedsBudget";
    case ErrorCode::NegativeSpend: return "NegativeSpend";
    case ErrorCode::InfeasibleCap: return "InfeasibleCap";
    case ErrorCode::DegenerateN: return "DegenerateN";
    case ErrorCode::NegativeRate: return "NegativeRate";
    case ErrorCode::PeriodOutOfRange: return "PeriodOutOfRange";
    case ErrorCode::SingularAtZero: return "SingularAtZero";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ZeroBandwidth: return "ZeroBandwidth";
    case ErrorCode::NonpositiveDt: return "NonpositiveDt";
    case ErrorCode::NoConnections: return "NoConnections";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace creditband
