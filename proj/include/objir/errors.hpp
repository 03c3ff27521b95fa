#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace objir {

// Base for every error raised by the library. The CLI maps subclasses to
// exit codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class OutOfBounds : public Error {
public:
    using Error::Error;
};

// Point not covered by any quad of a deformed mesh.
class OutsideMesh : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

// Empty object set or other input the objective is undefined on.
class DegenerateInput : public Error {
public:
    using Error::Error;
};

class Unsupported : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class OptimizerError : public Error {
public:
    OptimizerError(const std::string& what, std::vector<double> trace)
        : Error(what), trace_(std::move(trace)) {}
    const std::vector<double>& trace() const { return trace_; }

private:
    std::vector<double> trace_;
};

struct CellIndex {
    int row = 0;
    int col = 0;
    bool operator==(const CellIndex&) const = default;
};

class FoldOverError : public Error {
public:
    FoldOverError(const std::string& what, std::vector<CellIndex> cells)
        : Error(what), cells_(std::move(cells)) {}
    const std::vector<CellIndex>& cells() const { return cells_; }

private:
    std::vector<CellIndex> cells_;
};

}  // namespace objir
