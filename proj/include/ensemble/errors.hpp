#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ensemble {

// Base for every error raised by the library. Callers that only care about
// "something in the ensemble pipeline failed" catch this one.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

// T1 and T2 coincide (or nearly so) on the sample; the optimal weight is undefined.
class DegeneratePair : public Error {
public:
    using Error::Error;
};

class IllConditionedDesign : public Error {
public:
    using Error::Error;
};

class DivergedTraining : public Error {
public:
    DivergedTraining(std::size_t epoch, const std::string& what)
        : Error("training diverged at epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class SelectionFailed : public Error {
public:
    using Error::Error;
};

class SearchFailed : public Error {
public:
    using Error::Error;
};

class DegenerateMetrics : public Error {
public:
    using Error::Error;
};

class ScenarioFailed : public Error {
public:
    using Error::Error;
};

class LabelGenerationFailed : public Error {
public:
    using Error::Error;
};

}  // namespace ensemble
