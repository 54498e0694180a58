#pragma once

#include <stdexcept>
#include <string>

namespace morphiris {

/// Base of every error raised by the library. `is_validation()` separates
/// bad inputs (CLI exit code 2) from failures while processing valid ones.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, bool validation = false)
        : std::runtime_error(what), validation_(validation) {}
    bool is_validation() const noexcept { return validation_; }

private:
    bool validation_;
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error(what, true) {}
};

class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& what) : Error(what, true) {}
};

class CapacityError : public Error {
public:
    CapacityError(const std::string& what, std::size_t maximum)
        : Error(what, true), maximum_(maximum) {}
    std::size_t maximum() const noexcept { return maximum_; }

private:
    std::size_t maximum_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

class SegmentationError : public Error {
public:
    explicit SegmentationError(const std::string& what) : Error(what) {}
};

class FitError : public Error {
public:
    explicit FitError(const std::string& what) : Error(what) {}
};

class MorphError : public Error {
public:
    explicit MorphError(const std::string& what) : Error(what) {}
};

class EncodeError : public Error {
public:
    explicit EncodeError(const std::string& what) : Error(what) {}
};

class ComparisonError : public Error {
public:
    explicit ComparisonError(const std::string& what) : Error(what) {}
};

class MetricError : public Error {
public:
    explicit MetricError(const std::string& what) : Error(what, true) {}
};

class ModelError : public Error {
public:
    explicit ModelError(const std::string& what) : Error(what) {}
};

class PipelineError : public Error {
public:
    PipelineError(const std::string& stage, const std::string& item, const std::string& what)
        : Error("stage '" + stage + "' failed on '" + item + "': " + what),
          stage_(stage), item_(item) {}
    const std::string& stage() const noexcept { return stage_; }
    const std::string& item() const noexcept { return item_; }

private:
    std::string stage_;
    std::string item_;
};

}  // namespace morphiris
