#include "optforge/analysis/code_vector.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include <Eigen/Dense>

namespace optforge {

namespace {

const std::set<std::string>& cpp_keywords() {
  static const std::set<std::string> kKeywords = {
      "alignas", "alignof", "and", "and_eq", "asm", "auto", "bitand", "bitor", "bool",
      "break", "case", "catch", "char", "char8_t", "char16_t", "char32_t", "class",
      "compl", "concept", "const", "consteval", "constexpr", "constinit", "const_cast",
      "continue", "co_await", "co_return", "co_yield", "decltype", "default", "delete",
      "do", "double", "dynamic_cast", "else", "enum", "explicit", "export", "extern",
      "false", "float", "for", "friend", "goto", "if", "inline", "int", "long",
      "mutable", "namespace", "new", "noexcept", "not", "not_eq", "nullptr", "operator",
      "or", "or_eq", "private", "protected", "public", "register", "reinterpret_cast",
      "requires", "return", "short", "signed", "sizeof", "static", "static_assert",
      "static_cast", "struct", "switch", "template", "this", "thread_local", "throw",
      "true", "try", "typedef", "typeid", "typename", "union", "unsigned", "using",
      "virtual", "void", "volatile", "wchar_t", "while", "xor", "xor_eq"};
  return kKeywords;
}

// Blanks out comments and string/char literals so their contents do not leak
// tokens; the layout (offsets) is preserved.
std::string strip_non_code(const std::string& source) {
  std::string out(source);
  std::size_t i = 0;
  while (i < out.size()) {
    char c = out[i];
    if (c == '/' && i + 1 < out.size() && out[i + 1] == '/') {
      while (i < out.size() && out[i] != '\n') out[i++] = ' ';
    } else if (c == '/' && i + 1 < out.size() && out[i + 1] == '*') {
      out[i] = out[i + 1] = ' ';
      i += 2;
      while (i < out.size() && !(out[i] == '*' && i + 1 < out.size() && out[i + 1] == '/')) {
        if (out[i] != '\n') out[i] = ' ';
        ++i;
      }
      if (i + 1 < out.size()) {
        out[i] = out[i + 1] = ' ';
        i += 2;
      }
    } else if (c == '"' || c == '\'') {
      char quote = c;
      out[i++] = ' ';
      while (i < out.size() && out[i] != quote) {
        if (out[i] == '\\' && i + 1 < out.size()) out[i + 1] = ' ';
        if (out[i] != '\n') out[i] = ' ';
        ++i;
      }
      if (i < out.size()) out[i++] = ' ';
    } else {
      ++i;
    }
  }
  return out;
}

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

std::vector<std::string> code_tokens(const std::string& source) {
  std::string code = strip_non_code(source);
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < code.size()) {
    if (!ident_start(code[i])) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    while (i < code.size() && ident_char(code[i])) ++i;
    std::string word = code.substr(begin, i - begin);
    if (cpp_keywords().count(word)) {
      tokens.push_back(std::move(word));
      continue;
    }
    std::size_t next = i;
    while (next < code.size() &&
           std::isspace(static_cast<unsigned char>(code[next]))) {
      ++next;
    }
    if (next < code.size() && code[next] == '(') tokens.push_back(std::move(word));
  }
  return tokens;
}

Embedding embed_corpus(const std::vector<std::string>& sources) {
  Embedding out;
  std::vector<std::map<std::string, double>> counts(sources.size());
  std::set<std::string> vocabulary;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (auto& token : code_tokens(sources[i])) {
      counts[i][token] += 1.0;
      vocabulary.insert(std::move(token));
    }
  }
  out.vocabulary.assign(vocabulary.begin(), vocabulary.end());
  out.vectors.resize(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    out.vectors[i].reserve(out.vocabulary.size());
    for (const auto& word : out.vocabulary) {
      auto it = counts[i].find(word);
      out.vectors[i].push_back(it == counts[i].end() ? 0.0 : it->second);
    }
  }
  return out;
}

std::vector<std::vector<double>> pca_project(const std::vector<std::vector<double>>& vectors,
                                             std::size_t dims) {
  std::size_t n = vectors.size();
  if (n == 0 || dims == 0) return std::vector<std::vector<double>>(n);
  std::size_t d = vectors[0].size();

  Eigen::MatrixXd data(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vectors[i][j];
  }
  Eigen::RowVectorXd mean = data.colwise().mean();
  data.rowwise() -= mean;

  Eigen::MatrixXd cov = data.transpose() * data / std::max<double>(1.0, static_cast<double>(n) - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);

  std::vector<std::vector<double>> projected(n, std::vector<double>(dims, 0.0));
  std::size_t available = std::min(dims, static_cast<std::size_t>(solver.eigenvalues().size()));
  for (std::size_t comp = 0; comp < available; ++comp) {
    // Eigen orders eigenvalues ascending; walk from the top.
    Eigen::Index column = solver.eigenvectors().cols() - 1 - static_cast<Eigen::Index>(comp);
    Eigen::VectorXd axis = solver.eigenvectors().col(column);
    Eigen::Index largest = 0;
    axis.cwiseAbs().maxCoeff(&largest);
    if (axis(largest) < 0.0) axis = -axis;
    Eigen::VectorXd coords = data * axis;
    for (std::size_t i = 0; i < n; ++i) projected[i][comp] = coords(static_cast<Eigen::Index>(i));
  }
  return projected;
}

double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

}  // namespace optforge
