#include "rsde/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace rsde {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << content;
}

bool file_exists(const std::string& path) { return std::filesystem::exists(path); }

void ensure_dir(const std::string& path) { std::filesystem::create_directories(path); }

void write_trajectory_csv(const std::string& path, const std::vector<double>& times,
                          const std::vector<double>& values, int d) {
    std::string out = "# schema=trajectory v1\nt";
    for (int i = 1; i <= d; ++i)
        out += ",X" + std::to_string(i);
    out += "\n";
    for (std::size_t m = 0; m < times.size(); ++m) {
        out += format_double(times[m]);
        for (int i = 0; i < d; ++i)
            out += "," + format_double(values[m * d + i]);
        out += "\n";
    }
    write_text_file(path, out);
}

void write_ensemble_csv(const std::string& path, const std::vector<double>& times,
                        const std::vector<double>& rows, int n, std::size_t n_samples) {
    std::string out = "# schema=ensemble v1\nsample_id,time";
    for (int c = 1; c <= n; ++c)
        out += ",y" + std::to_string(c);
    out += "\n";
    for (std::size_t s = 0; s < n_samples; ++s)
        for (std::size_t ti = 0; ti < times.size(); ++ti) {
            out += std::to_string(s) + "," + format_double(times[ti]);
            for (int c = 0; c < n; ++c)
                out += "," + format_double(rows[(s * times.size() + ti) * n + c]);
            out += "\n";
        }
    write_text_file(path, out);
}

void write_study_csv(const std::string& path, const ConvergenceStudy& study) {
    std::string out = "# schema=study v1\neps,statistic,value,p,seed,replicate\n";
    for (const auto& c : study.cells) {
        out += format_double(c.eps) + "," + c.statistic + "," + format_double(c.value) + ",";
        if (c.p >= 0.0)
            out += format_double(c.p);
        out += "," + std::to_string(c.seed) + "," + std::to_string(c.replicate) + "\n";
    }
    write_text_file(path, out);
}

} // namespace rsde
