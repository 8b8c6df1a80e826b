#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace lcm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Malformed model structure, dimension mismatch, bad input file.
struct structural_error : std::runtime_error {
    explicit structural_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Underflow or other loss of validity during evaluation.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lcm
