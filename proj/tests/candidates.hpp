#pragma once

// Candidate sources and chat-script helpers shared by the orchestrator tests
// and the acceptance suite.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "optforge/dataio.hpp"

namespace optforge::testing {

inline const char* kCorrectMatmul = R"(#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>
int main(int argc, char** argv) {
  if (argc != 3) return 1;
  std::ifstream in(argv[1]);
  if (!in) return 1;
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    rows.push_back(row);
  }
  auto n = static_cast<std::size_t>(rows[0][0]);
  std::vector<double> a(n * n), b(n * n), c(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      a[i + j * n] = rows[1 + j][i];
      b[i + j * n] = rows[1 + n + j][i];
    }
  std::printf("MEASURE_BEGIN\n");
  std::fflush(stdout);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      double bkj = b[k + j * n];
      for (std::size_t i = 0; i < n; ++i) c[i + j * n] += a[i + k * n] * bkj;
    }
  std::printf("MEASURE_END\n");
  std::fflush(stdout);
  std::ofstream out(argv[2]);
  out.precision(17);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i) out << ",";
      out << c[i + j * n];
    }
    out << "\n";
  }
  return 0;
}
)";

inline const char* kWrongMatmul = R"(#include <fstream>
int main(int argc, char** argv) {
  std::ofstream out(argv[2]);
  out << "42\n";
  return 0;
}
)";

inline std::string fenced(const std::string& code) { return "```cpp\n" + code + "```\n"; }

inline std::string strategist_reply(const std::string& strategy,
                                    const std::string& instructions) {
  return "STRATEGY: " + strategy + "\nINSTRUCTIONS: " + instructions;
}

inline std::filesystem::path write_chat_script(const std::filesystem::path& path,
                                               const std::vector<std::string>& strategist,
                                               const std::vector<std::string>& implementor,
                                               bool cycle = false) {
  nlohmann::json script = {
      {"strategist", strategist}, {"implementor", implementor}, {"cycle", cycle}};
  write_text_file(path, script.dump());
  return path;
}

}  // namespace optforge::testing
