#ifndef PKGTRIAGE_ERRORS_HPP
#define PKGTRIAGE_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pkgtriage {

// Base class for all library errors so callers can catch one type at the
// CLI boundary.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- report ingestion ---

class MalformedReport : public Error {
public:
    explicit MalformedReport(const std::string& msg)
        : Error("malformed report: " + msg) {}
};

class MissingIdentity : public Error {
public:
    explicit MissingIdentity(const std::string& msg)
        : Error("missing package identity: " + msg) {}
};

// --- labeling ---

class FileUnreadable : public Error {
public:
    explicit FileUnreadable(const std::string& path)
        : Error("cannot read file: " + path) {}
};

class MalformedLine : public Error {
public:
    MalformedLine(std::size_t line, const std::string& msg)
        : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// --- features ---

class EmptyTrainingSet : public Error {
public:
    EmptyTrainingSet() : Error("encoder requires a non-empty training set") {}
};

// --- classifiers ---

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& msg)
        : Error("dimension mismatch: " + msg) {}
};

class TooFewSamples : public Error {
public:
    explicit TooFewSamples(const std::string& msg)
        : Error("too few samples: " + msg) {}
};

class EmptyNode : public Error {
public:
    EmptyNode() : Error("impurity of an empty node is undefined") {}
};

// --- evaluation ---

class LengthMismatch : public Error {
public:
    explicit LengthMismatch(const std::string& msg)
        : Error("length mismatch: " + msg) {}
};

class SingleClass : public Error {
public:
    SingleClass() : Error("ROC requires at least one sample of each class") {}
};

class ClassTooSmall : public Error {
public:
    explicit ClassTooSmall(const std::string& msg)
        : Error("class too small for stratified folds: " + msg) {}
};

class BadK : public Error {
public:
    explicit BadK(const std::string& msg) : Error("bad fold count: " + msg) {}
};

} // namespace pkgtriage

#endif // PKGTRIAGE_ERRORS_HPP
