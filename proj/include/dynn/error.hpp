#pragma once

#include <stdexcept>
#include <string>

namespace dynn {

// Base of every library error. The CLI maps the subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input files, malformed JSON/CSV, inconsistent dimensions in a file.
class ParseError : public Error {
public:
    using Error::Error;
};

// A mathematical precondition does not hold (exit code 2 in the CLI).
class PreconditionError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public PreconditionError {
public:
    ConvergenceError(const std::string& what, int iterations)
        : PreconditionError(what), iterations_(iterations) {}
    int iterations() const { return iterations_; }

private:
    int iterations_;
};

class InseparableBlocksError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class SpectraNotSeparatedError : public PreconditionError {
public:
    SpectraNotSeparatedError(const std::string& what, double gap, int block_i = -1, int block_j = -1)
        : PreconditionError(what), gap_(gap), block_i_(block_i), block_j_(block_j) {}
    double gap() const { return gap_; }
    int block_i() const { return block_i_; }
    int block_j() const { return block_j_; }

private:
    double gap_;
    int block_i_, block_j_;
};

class ForcedSplitError : public PreconditionError {
public:
    ForcedSplitError(const std::string& what, std::size_t requested, std::size_t distinct)
        : PreconditionError(what), requested_(requested), distinct_(distinct) {}
    std::size_t requested() const { return requested_; }
    std::size_t distinct() const { return distinct_; }

private:
    std::size_t requested_, distinct_;
};

class GMembershipError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class OverflowError : public PreconditionError {
public:
    OverflowError(const std::string& what, double norm) : PreconditionError(what), norm_(norm) {}
    double norm() const { return norm_; }

private:
    double norm_;
};

// Adaptive integration gave up (exit code 3 in the CLI).
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double t, int layer = -1, int neuron = -1)
        : Error(what), t_(t), layer_(layer), neuron_(neuron) {}
    double t() const { return t_; }
    int layer() const { return layer_; }
    int neuron() const { return neuron_; }

private:
    double t_;
    int layer_, neuron_;
};

} // namespace dynn
