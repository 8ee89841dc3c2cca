#pragma once

#include "dynn/preprocess.hpp"
#include "dynn/simulate.hpp"

#include <vector>

namespace dynn::oracle {

struct LsimResult {
    std::vector<double> times;
    Matrix states;  // one row per time
    Matrix outputs; // one row per time
};

// Zero initial state. u_samples has one row per time.
LsimResult lsim_exact(const StateSpace& ss, const std::vector<double>& times, const Matrix& u_samples, Interpolation mode);

struct CoupledSolution {
    DenseTrajectory x;
    std::size_t nfe = 0;
    Matrix c, d;
    InputSignal u;

    Vector output(double t) const;
    Matrix sample_outputs(const std::vector<double>& times) const;
};

CoupledSolution reference_coupled_solve(const StateSpace& ss, const InputSignal& u, double t0, double tf, const SolverConfig& cfg);

} // namespace dynn::oracle
