#pragma once
#include <string>
#include <vector>

namespace fluxline {

// decimal text with 12 significant digits, used for every numeric artifact
std::string fmt12(double v);

// nearest double representable by fmt12; keeps JSON artifacts on the same
// 12-digit contract as the CSV output
double round_sig(double v);

struct CsvWriter {
    explicit CsvWriter(const std::string& path, const std::vector<std::string>& header,
                       const std::string& config_hash = "");
    ~CsvWriter();
    void row(const std::vector<std::string>& cells);
    void num_row(const std::vector<double>& cells);

  private:
    void* f_ = nullptr;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace fluxline
