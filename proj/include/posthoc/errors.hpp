#pragma once

#include <stdexcept>
#include <string>

namespace posthoc {

// Base for everything this library throws on contract violations or bad input.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// core / ingest
struct RowSumError : Error { using Error::Error; };
struct ProbRangeError : Error { using Error::Error; };
struct LabelRangeError : Error { using Error::Error; };
struct ModelCountMismatch : Error { using Error::Error; };

// metrics
struct EmptyInput : Error { using Error::Error; };
struct SingleClassError : Error { using Error::Error; };

// aggregate
struct LengthMismatch : Error { using Error::Error; };
struct NonFiniteInput : Error { using Error::Error; };

// ges
struct EmptyPool : Error { using Error::Error; };
struct CountSumMismatch : Error { using Error::Error; };

// cmaes
struct NonFiniteLoss : Error { using Error::Error; };
struct EigenFailure : Error { using Error::Error; };

// stacking
struct DimensionMismatch : Error { using Error::Error; };

// stats
struct MissingCell : Error { using Error::Error; };
struct DegenerateTable : Error { using Error::Error; };
struct KOutOfRange : Error { using Error::Error; };
struct TableMismatch : Error { using Error::Error; };

// harness
struct FormatError : Error { using Error::Error; };
struct MetadataMismatch : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

} // namespace posthoc
