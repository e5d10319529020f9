#include "fluxline/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fluxline/errors.hpp"

namespace fluxline {

std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double round_sig(double v) {
    if (!std::isfinite(v)) return v;
    return std::strtod(fmt12(v).c_str(), nullptr);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header,
                     const std::string& config_hash) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw NumericError("cannot open output file " + path);
    f_ = f;
    if (!config_hash.empty()) std::fprintf(f, "# config_hash=%s\n", config_hash.c_str());
    for (size_t i = 0; i < header.size(); ++i)
        std::fprintf(f, "%s%s", header[i].c_str(), i + 1 < header.size() ? "," : "\n");
}

CsvWriter::~CsvWriter() {
    if (f_) std::fclose(static_cast<std::FILE*>(f_));
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    auto* f = static_cast<std::FILE*>(f_);
    for (size_t i = 0; i < cells.size(); ++i)
        std::fprintf(f, "%s%s", cells[i].c_str(), i + 1 < cells.size() ? "," : "\n");
}

void CsvWriter::num_row(const std::vector<double>& cells) {
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (double v : cells) s.push_back(fmt12(v));
    row(s);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw NumericError("cannot open output file " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NumericError("cannot read file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace fluxline
