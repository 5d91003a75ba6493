/**
 * @file instance_io.hpp
 * @brief Line-oriented text format for (problem, uncertainty set) pairs.
 *
 * @code
 * # key=value            metadata comments (any other '#' line is ignored)
 * dim 3
 * unconstrained          or: graph <m> <s> <t> followed by m lines "edge <k> <u> <v>"
 * ellipsoid              or: interval | finite <k> | axis
 * 1 -2 0                 center (finite: k scenario rows instead)
 * 1 0 0                  ellipsoid: n rows of C; interval: halfwidths;
 * 0 1 0                  axis: diagonal of D
 * 0 0 1
 * @endcode
 *
 * Numbers are written in shortest round-trip form, so write/read is exact.
 */

#ifndef MMR_INSTANCE_IO_HPP
#define MMR_INSTANCE_IO_HPP

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmr/core.hpp"

namespace mmr {

struct InstanceFile {
  CombinatorialProblem problem;
  UncertaintySet set;
  std::map<std::string, std::string> metadata;
};

namespace io_detail {

inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_row(std::ostream& os, const Vector& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ' ';
    os << format_number(v[i]);
  }
  os << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& is) {
    std::string line;
    while (std::getline(is, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos) continue;
      if (line[first] == '#') {
        const std::string body = line.substr(first + 1);
        const auto eq = body.find('=');
        if (eq != std::string::npos) {
          metadata[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
        }
        continue;
      }
      std::istringstream ss(line);
      std::string tok;
      while (ss >> tok) tokens_.push_back({tok, line_no_});
    }
  }

  std::string word() {
    if (pos_ >= tokens_.size()) throw InputError("instance file: unexpected end of input");
    return tokens_[pos_++].text;
  }

  void expect(const std::string& w) {
    const std::size_t line = here();
    const std::string got = word();
    if (got != w) fail(line, "expected '" + w + "', got '" + got + "'");
  }

  double number() {
    const std::size_t line = here();
    const std::string tok = word();
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
      fail(line, "bad number '" + tok + "'");
    }
    return v;
  }

  std::size_t index() {
    const std::size_t line = here();
    const std::string tok = word();
    std::size_t v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
      fail(line, "bad integer '" + tok + "'");
    }
    return v;
  }

  Vector row(std::size_t n) {
    Vector v(n);
    for (double& d : v) d = number();
    return v;
  }

  bool done() const { return pos_ >= tokens_.size(); }

  [[noreturn]] void fail(std::size_t line, const std::string& what) const {
    throw InputError("instance file line " + std::to_string(line) + ": " + what);
  }

  std::size_t here() const { return pos_ < tokens_.size() ? tokens_[pos_].line : line_no_; }

  std::map<std::string, std::string> metadata;

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
  }

  struct Token {
    std::string text;
    std::size_t line;
  };
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

}  // namespace io_detail

inline void write_instance(std::ostream& os, const CombinatorialProblem& problem,
                           const UncertaintySet& set,
                           const std::map<std::string, std::string>& metadata = {}) {
  const std::size_t n = problem.dimension();
  detail::require_dim(dimension(set), n, "uncertainty set");
  for (const auto& [k, v] : metadata) os << "# " << k << '=' << v << '\n';
  os << "dim " << n << '\n';
  if (problem.is_unconstrained()) {
    os << "unconstrained\n";
  } else {
    const Digraph& g = problem.graph();
    os << "graph " << g.num_arcs() << ' ' << g.source() << ' ' << g.sink() << '\n';
    for (std::size_t k = 0; k < g.num_arcs(); ++k) {
      os << "edge " << k << ' ' << g.arc(k).tail << ' ' << g.arc(k).head << '\n';
    }
  }
  if (const auto* box = std::get_if<IntervalSet>(&set)) {
    os << "interval\n";
    io_detail::write_row(os, box->center());
    io_detail::write_row(os, box->halfwidth());
  } else if (const auto* fin = std::get_if<FiniteSet>(&set)) {
    os << "finite " << fin->size() << '\n';
    for (const Vector& s : fin->scenarios()) io_detail::write_row(os, s);
  } else if (const auto* axis = std::get_if<AxisParallelEllipsoid>(&set)) {
    os << "axis\n";
    io_detail::write_row(os, axis->center());
    io_detail::write_row(os, axis->diag());
  } else {
    const auto& ell = std::get<GeneralEllipsoid>(set);
    os << "ellipsoid\n";
    io_detail::write_row(os, ell.center());
    for (std::size_t i = 0; i < n; ++i) io_detail::write_row(os, ell.shape().row(i));
  }
}

inline InstanceFile read_instance(std::istream& is) {
  io_detail::Reader in(is);
  in.expect("dim");
  const std::size_t n = in.index();
  if (n == 0) throw InputError("instance file: dimension must be positive");

  const std::size_t problem_line = in.here();
  const std::string kind = in.word();
  std::optional<CombinatorialProblem> problem;
  if (kind == "unconstrained") {
    problem = CombinatorialProblem::unconstrained(n);
  } else if (kind == "graph") {
    const std::size_t m = in.index(), s = in.index(), t = in.index();
    if (m != n) in.fail(problem_line, "graph arc count must equal dim");
    std::vector<Arc> arcs(m);
    std::size_t nodes = std::max(s, t) + 1;
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t line = in.here();
      in.expect("edge");
      if (in.index() != k) in.fail(line, "edges must be listed in index order");
      arcs[k].tail = in.index();
      arcs[k].head = in.index();
      nodes = std::max({nodes, arcs[k].tail + 1, arcs[k].head + 1});
    }
    problem = CombinatorialProblem::shortest_path(Digraph(nodes, std::move(arcs), s, t));
  } else {
    in.fail(problem_line, "unknown problem kind '" + kind + "'");
  }

  const std::size_t set_line = in.here();
  const std::string set_kind = in.word();
  std::optional<UncertaintySet> set;
  if (set_kind == "interval") {
    Vector c = in.row(n);
    Vector d = in.row(n);
    set = IntervalSet(std::move(c), std::move(d));
  } else if (set_kind == "finite") {
    const std::size_t k = in.index();
    std::vector<Vector> rows;
    for (std::size_t j = 0; j < k; ++j) rows.push_back(in.row(n));
    set = FiniteSet(std::move(rows));
  } else if (set_kind == "axis") {
    Vector c = in.row(n);
    Vector d = in.row(n);
    set = AxisParallelEllipsoid(std::move(c), std::move(d));
  } else if (set_kind == "ellipsoid") {
    Vector c = in.row(n);
    std::vector<Vector> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back(in.row(n));
    set = GeneralEllipsoid(std::move(c), Matrix::from_rows(rows));
  } else {
    in.fail(set_line, "unknown uncertainty kind '" + set_kind + "'");
  }
  if (!in.done()) in.fail(in.here(), "trailing content");
  return {std::move(*problem), std::move(*set), std::move(in.metadata)};
}

inline InstanceFile load_instance(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open instance file " + path);
  return read_instance(f);
}

inline void save_instance(const std::string& path, const CombinatorialProblem& problem,
                          const UncertaintySet& set,
                          const std::map<std::string, std::string>& metadata = {}) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write instance file " + path);
  write_instance(f, problem, set, metadata);
  if (!f) throw std::runtime_error("failed writing instance file " + path);
}

}  // namespace mmr

#endif  // MMR_INSTANCE_IO_HPP
