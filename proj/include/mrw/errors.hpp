#pragma once

#include <stdexcept>
#include <string>

namespace mrw {

class Error : public std::runtime_error {
public:
    Error(const std::string& kind, int code, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), kind_(kind), code_(code) {}
    const std::string& kind() const { return kind_; }
    int code() const { return code_; }

private:
    std::string kind_;
    int code_;
};

#define MRW_DEFINE_ERROR(Name, Code)                                   \
    struct Name : Error {                                              \
        explicit Name(const std::string& m) : Error(#Name, Code, m) {} \
    };

// exit codes used by the command line tool
MRW_DEFINE_ERROR(NotStochastic, 1)
MRW_DEFINE_ERROR(Reducible, 2)
MRW_DEFINE_ERROR(TailMassTooLarge, 3)
MRW_DEFINE_ERROR(InvalidDistribution, 4)
MRW_DEFINE_ERROR(InvalidParameter, 4)
MRW_DEFINE_ERROR(ConfigError, 5)
MRW_DEFINE_ERROR(LatticeBlowup, 6)
MRW_DEFINE_ERROR(UnsupportedKernel, 7)
MRW_DEFINE_ERROR(EmptySample, 8)
MRW_DEFINE_ERROR(IncompatibleAnchor, 9)
MRW_DEFINE_ERROR(NotPositiveDivergent, 10)
MRW_DEFINE_ERROR(NullHomologousInput, 11)
MRW_DEFINE_ERROR(InsufficientSamples, 12)
MRW_DEFINE_ERROR(IoError, 14)

#undef MRW_DEFINE_ERROR

}  // namespace mrw
