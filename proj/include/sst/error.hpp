#pragma once

#include <stdexcept>
#include <string>

namespace sst {

enum class Err {
    MissingFile,
    BadMagic,
    LengthMismatch,
    DimensionMismatch,
    NonSimplexRow,
    IndexOutOfRange,
    InvalidScene,
    DegenerateScene,
    MissingGroundTruth,
    MissingSoftLabels,
    MissingFeature,
    ShapeMismatch,
    EmptyProposal,
    EmptyProposalSet,
    NoForegroundPoints,
    InvalidNode,
    BadConfig,
};

inline const char* err_name(Err e) {
    switch (e) {
        case Err::MissingFile: return "MissingFile";
        case Err::BadMagic: return "BadMagic";
        case Err::LengthMismatch: return "LengthMismatch";
        case Err::DimensionMismatch: return "DimensionMismatch";
        case Err::NonSimplexRow: return "NonSimplexRow";
        case Err::IndexOutOfRange: return "IndexOutOfRange";
        case Err::InvalidScene: return "InvalidScene";
        case Err::DegenerateScene: return "DegenerateScene";
        case Err::MissingGroundTruth: return "MissingGroundTruth";
        case Err::MissingSoftLabels: return "MissingSoftLabels";
        case Err::MissingFeature: return "MissingFeature";
        case Err::ShapeMismatch: return "ShapeMismatch";
        case Err::EmptyProposal: return "EmptyProposal";
        case Err::EmptyProposalSet: return "EmptyProposalSet";
        case Err::NoForegroundPoints: return "NoForegroundPoints";
        case Err::InvalidNode: return "InvalidNode";
        case Err::BadConfig: return "BadConfig";
    }
    return "Unknown";
}

class SstError : public std::runtime_error {
public:
    SstError(Err kind, const std::string& msg)
        : std::runtime_error(std::string(err_name(kind)) + ": " + msg), kind_(kind) {}

    Err kind() const { return kind_; }

private:
    Err kind_;
};

[[noreturn]] inline void fail(Err kind, const std::string& msg) {
    throw SstError(kind, msg);
}

} // namespace sst
