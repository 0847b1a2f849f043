#pragma once

#include <stdexcept>
#include <string>

namespace qcav {

// Not enough usable data to attempt an estimate (empty histograms, too few bins).
class insufficient_data_error : public std::runtime_error {
public:
    explicit insufficient_data_error(const std::string& what) : std::runtime_error(what) {}
};

// Model cannot be evaluated or solved for the given parameters (singular systems,
// unidentifiable combinations).
class degenerate_model_error : public std::runtime_error {
public:
    explicit degenerate_model_error(const std::string& what) : std::runtime_error(what) {}
};

}
