#pragma once

#include <Eigen/Dense>
#include <string>

#include "semlearn/population.hpp"
#include "semlearn/sem.hpp"
#include "semlearn/synth.hpp"

namespace semlearn {

// File formats use 1-based vertex labels; matrices travel as row-major dense
// arrays. All writers go through write_file_atomic (temp file plus rename) so
// failures never leave partial output behind.

std::string sem_to_json(const Sem& sem);
Sem sem_from_json(const std::string& text);

std::string matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const std::string& text);

std::string learn_result_to_json(const LearnResult& result);
std::string learn_result_to_dot(const LearnResult& result);

std::string report_to_json(const IdentifiabilityReport& report);

std::string data_to_csv(const DataMatrix& data);
DataMatrix data_from_csv(const std::string& text);

Eigen::VectorXd vector_from_json(const std::string& text);

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace semlearn
