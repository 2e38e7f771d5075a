#pragma once

#include <string>
#include <vector>

#include "rsde/stats.hpp"

namespace rsde {

// CSV schemas (first line is a "# schema=... v1" comment):
//   trajectory: t, X1..Xd
//   ensemble:   sample_id, time, y1..yn
//   study:      eps, statistic, value, p, seed, replicate
void write_trajectory_csv(const std::string& path, const std::vector<double>& times,
                          const std::vector<double>& values, int d);
void write_ensemble_csv(const std::string& path, const std::vector<double>& times,
                        const std::vector<double>& rows, int n, std::size_t n_samples);
void write_study_csv(const std::string& path, const ConvergenceStudy& study);

void write_text_file(const std::string& path, const std::string& content);
bool file_exists(const std::string& path);
void ensure_dir(const std::string& path);

// Doubles are printed with 17 significant digits so round-trips are exact.
std::string format_double(double v);

} // namespace rsde
