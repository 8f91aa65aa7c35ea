#include "etstl/formula.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>

#include "etstl/error.hpp"

namespace etstl {

namespace {

// Untyped parse tree. Groups are flattened during classification since
// conjunction is associative.
struct Node {
  enum class Kind { Literal, Temporal };
  Kind kind = Kind::Literal;
  Literal literal;
  TemporalOp op = TemporalOp::Eventually;
  Interval interval;
  std::vector<Node> body;
  std::size_t position = 0;
};

class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& options)
      : text_(text), options_(options) {}

  std::vector<Node> parse_top() {
    auto items = parse_conjunction();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return items;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, pos_);
  }

  void skip_space() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  // Reads an identifier without consuming it.
  std::string_view peek_word() {
    skip_space();
    std::size_t end = pos_;
    while (end < text_.size() &&
           (std::isalpha(static_cast<unsigned char>(text_[end])) ||
            text_[end] == '_')) {
      ++end;
    }
    return text_.substr(pos_, end - pos_);
  }

  bool temporal_ahead() {
    auto word = peek_word();
    if (word != "G" && word != "F") return false;
    std::size_t p = pos_ + 1;
    while (p < text_.size() && std::isspace(static_cast<unsigned char>(text_[p]))) ++p;
    return p < text_.size() && text_[p] == '[';
  }

  bool consume_and() {
    std::size_t saved = pos_;
    if (peek_word() == "and") {
      pos_ += 3;
      return true;
    }
    pos_ = saved;
    return false;
  }

  std::vector<Node> parse_conjunction() {
    std::vector<Node> items;
    items.push_back(parse_item());
    while (true) {
      std::size_t saved = pos_;
      if (!consume_and()) break;
      if (at_end() || peek() == ')') {
        pos_ = saved;
        skip_space();
        fail("dangling 'and'");
      }
      items.push_back(parse_item());
    }
    return items;
  }

  Node parse_item() {
    if (temporal_ahead()) return parse_temporal();
    return parse_term_group();
  }

  // A temporal operator's body extends greedily over following non-temporal
  // terms, matching psi := term ("and" term)*.
  Node parse_temporal() {
    Node node;
    node.kind = Node::Kind::Temporal;
    node.position = pos_;
    node.op = peek_word() == "G" ? TemporalOp::Always : TemporalOp::Eventually;
    ++pos_;
    expect('[');
    std::size_t interval_pos = pos_;
    node.interval.lo = parse_number();
    expect(',');
    node.interval.hi = parse_number();
    expect(']');
    if (!std::isfinite(node.interval.lo) || !std::isfinite(node.interval.hi)) {
      throw FormulaError("interval bounds must be finite (at offset " +
                         std::to_string(interval_pos) + ")");
    }
    if (node.interval.lo < 0.0) {
      throw FormulaError("interval start must be non-negative (at offset " +
                         std::to_string(interval_pos) + ")");
    }
    if (node.interval.lo > node.interval.hi) {
      throw FormulaError("interval [" + std::to_string(node.interval.lo) +
                         "," + std::to_string(node.interval.hi) +
                         "] has a > b (at offset " +
                         std::to_string(interval_pos) + ")");
    }
    if (at_end()) fail("temporal operator without body");
    if (temporal_ahead()) {
      // Nested operator directly as body: F[..] F[..] p
      node.body.push_back(parse_temporal());
      return node;
    }
    append_flat(node.body, parse_term_group());
    while (true) {
      std::size_t saved = pos_;
      if (!consume_and()) break;
      if (temporal_ahead() || at_end() || peek() == ')') {
        pos_ = saved;
        break;
      }
      append_flat(node.body, parse_term_group());
    }
    return node;
  }

  static void append_flat(std::vector<Node>& into, Node node) {
    if (node.kind == Node::Kind::Literal && node.body.size() > 0) {
      // Parenthesized group.
      for (auto& child : node.body) into.push_back(std::move(child));
    } else {
      into.push_back(std::move(node));
    }
  }

  // term := pred | "not" pred | "(" conjunction ")"
  // A group is returned as a Literal-kind node with a non-empty body.
  Node parse_term_group() {
    Node node;
    node.position = pos_;
    if (peek() == '(') {
      ++pos_;
      auto inner = parse_conjunction();
      expect(')');
      for (auto& child : inner) append_flat(node.body, std::move(child));
      return node;
    }
    bool negated = false;
    if (peek_word() == "not") {
      pos_ += 3;
      negated = true;
    }
    std::size_t pred_pos = (skip_space(), pos_);
    node.literal.predicate = parse_predicate();
    node.literal.negated = negated;
    if (negated && !options_.allow_nonconcave &&
        !std::holds_alternative<AffinePredicate>(node.literal.predicate)) {
      throw FormulaError(
          "negation of a non-affine predicate breaks concavity (at offset " +
          std::to_string(pred_pos) + ")");
    }
    return node;
  }

  Predicate parse_predicate() {
    std::size_t start = pos_;
    auto word = peek_word();
    if (word.empty()) fail("expected predicate");
    std::string name(word);
    pos_ += word.size();
    expect('(');
    Predicate result;
    if (name == "ball") {
      BallPredicate ball;
      ball.selector = parse_index_list();
      expect(';');
      auto center = parse_number_list();
      expect(';');
      ball.radius = parse_number();
      if (center.size() != ball.selector.size()) {
        pos_ = start;
        fail("ball center and selector lengths differ");
      }
      ball.center = Eigen::Map<const Vector>(center.data(),
                                             static_cast<Eigen::Index>(center.size()));
      if (!(ball.radius > 0.0)) {
        pos_ = start;
        fail("ball radius must be positive");
      }
      result = std::move(ball);
    } else if (name == "join") {
      JoinPredicate join;
      join.first = parse_index_list();
      expect(';');
      join.second = parse_index_list();
      expect(';');
      join.radius = parse_number();
      if (join.first.size() != join.second.size()) {
        pos_ = start;
        fail("join selectors differ in length");
      }
      if (!(join.radius > 0.0)) {
        pos_ = start;
        fail("join radius must be positive");
      }
      result = std::move(join);
    } else if (name == "band") {
      BandPredicate band;
      band.index = parse_index();
      expect(';');
      band.center = parse_number();
      expect(';');
      band.halfwidth = parse_number();
      if (!(band.halfwidth > 0.0)) {
        pos_ = start;
        fail("band halfwidth must be positive");
      }
      result = band;
    } else if (name == "aff") {
      AffinePredicate aff;
      auto weights = parse_number_list();
      expect(';');
      aff.offset = parse_number();
      aff.weights = Eigen::Map<const Vector>(weights.data(),
                                             static_cast<Eigen::Index>(weights.size()));
      result = std::move(aff);
    } else {
      pos_ = start;
      fail("unknown predicate '" + name + "'");
    }
    expect(')');
    return result;
  }

  double parse_number() {
    skip_space();
    std::size_t start = pos_;
    std::size_t end = pos_;
    if (end < text_.size() && (text_[end] == '+' || text_[end] == '-')) ++end;
    bool digits = false;
    while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) {
      ++end;
      digits = true;
    }
    if (end < text_.size() && text_[end] == '.') {
      ++end;
      while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) {
        ++end;
        digits = true;
      }
    }
    if (!digits) fail("expected number");
    if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
      std::size_t exp = end + 1;
      if (exp < text_.size() && (text_[exp] == '+' || text_[exp] == '-')) ++exp;
      if (exp < text_.size() && std::isdigit(static_cast<unsigned char>(text_[exp]))) {
        while (exp < text_.size() && std::isdigit(static_cast<unsigned char>(text_[exp]))) ++exp;
        end = exp;
      }
    }
    const char* first = text_.data() + start;
    if (*first == '+') ++first;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, text_.data() + end, value);
    if (ec != std::errc() || ptr != text_.data() + end) fail("malformed number");
    pos_ = end;
    return value;
  }

  int parse_index() {
    skip_space();
    std::size_t start = pos_;
    std::size_t end = pos_;
    while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
    if (end == start) fail("expected non-negative integer index");
    int value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + end, value);
    if (ec != std::errc() || ptr != text_.data() + end) fail("index out of range");
    pos_ = end;
    return value;
  }

  std::vector<int> parse_index_list() {
    std::vector<int> out{parse_index()};
    while (peek() == ',') {
      ++pos_;
      out.push_back(parse_index());
    }
    return out;
  }

  std::vector<double> parse_number_list() {
    std::vector<double> out{parse_number()};
    while (peek() == ',') {
      ++pos_;
      out.push_back(parse_number());
    }
    return out;
  }

  std::string_view text_;
  ParseOptions options_;
  std::size_t pos_ = 0;
};

bool is_temporal(const Node& n) { return n.kind == Node::Kind::Temporal; }

Conjunction collect_literals(const std::vector<Node>& nodes) {
  Conjunction c;
  for (const auto& n : nodes) {
    if (!is_temporal(n)) c.literals.push_back(n.literal);
  }
  return c;
}

EventuallyChain build_chain(const Node& root) {
  EventuallyChain chain;
  const Node* node = &root;
  while (true) {
    if (node->op != TemporalOp::Eventually) {
      throw FormulaError("nested chains may only use F operators (at offset " +
                         std::to_string(node->position) + ")");
    }
    ChainStep step;
    step.interval = node->interval;
    step.body = collect_literals(node->body);
    const Node* next = nullptr;
    for (const auto& child : node->body) {
      if (!is_temporal(child)) continue;
      if (next != nullptr) {
        throw FormulaError("a chain step may contain only one nested F (at offset " +
                           std::to_string(child.position) + ")");
      }
      next = &child;
    }
    if (step.body.literals.empty()) {
      throw FormulaError("chain step needs a non-temporal conjunct (at offset " +
                         std::to_string(node->position) + ")");
    }
    chain.steps.push_back(std::move(step));
    if (next == nullptr) break;
    node = next;
  }
  return chain;
}

}  // namespace

SequentialFormula parse_formula(std::string_view text,
                                const ParseOptions& options) {
  bool blank = std::all_of(text.begin(), text.end(), [](char c) {
    return std::isspace(static_cast<unsigned char>(c));
  });
  if (blank) throw ParseError("empty formula", 0);

  Parser parser(text, options);
  std::vector<Node> top = parser.parse_top();

  for (const auto& item : top) {
    if (!is_temporal(item)) {
      throw FormulaError(
          "top-level conjuncts must be temporal formulas (at offset " +
          std::to_string(item.position) + ")");
    }
  }

  auto nested = [](const Node& n) {
    return std::any_of(n.body.begin(), n.body.end(), is_temporal);
  };

  if (top.size() == 1 && nested(top.front())) {
    return build_chain(top.front());
  }

  AtomSequence seq;
  for (const auto& item : top) {
    if (nested(item)) {
      throw FormulaError(
          "nested temporal operators are only supported as a single F chain "
          "(at offset " + std::to_string(item.position) + ")");
    }
    TemporalFormula atom;
    atom.op = item.op;
    atom.interval = item.interval;
    atom.body = collect_literals(item.body);
    if (!seq.atoms.empty() && seq.atoms.back().interval.hi > atom.interval.lo) {
      throw FormulaError("atoms must be ordered with b_k <= a_{k+1} (at offset " +
                         std::to_string(item.position) + ")");
    }
    seq.atoms.push_back(std::move(atom));
  }
  return seq;
}

std::vector<AtomicTask> normalize_sequential(const SequentialFormula& theta) {
  std::vector<AtomicTask> tasks;
  if (const auto* seq = std::get_if<AtomSequence>(&theta)) {
    for (const auto& atom : seq->atoms) {
      AtomicTask task;
      task.psi = atom.body;
      task.op = atom.op;
      task.window = atom.interval;
      task.schedule = atom.interval;
      task.absolute_time = true;
      tasks.push_back(std::move(task));
    }
    return tasks;
  }
  const auto& chain = std::get<EventuallyChain>(theta);
  double a = 0.0;
  double b = 0.0;
  for (const auto& step : chain.steps) {
    a += step.interval.lo;
    b += step.interval.hi;
    AtomicTask task;
    task.psi = step.body;
    task.op = TemporalOp::Eventually;
    task.window = {a, b};
    task.schedule = step.interval;
    task.absolute_time = false;
    tasks.push_back(std::move(task));
  }
  return tasks;
}

double formula_horizon(const SequentialFormula& theta) {
  double horizon = 0.0;
  for (const auto& task : normalize_sequential(theta)) {
    horizon = std::max(horizon, task.window.hi);
  }
  return horizon;
}

namespace {

int max_index(const Predicate& p) {
  return std::visit(
      [](const auto& pred) -> int {
        using T = std::decay_t<decltype(pred)>;
        if constexpr (std::is_same_v<T, BallPredicate>) {
          return pred.selector.empty()
                     ? -1
                     : *std::max_element(pred.selector.begin(), pred.selector.end());
        } else if constexpr (std::is_same_v<T, JoinPredicate>) {
          int m = -1;
          for (int i : pred.first) m = std::max(m, i);
          for (int i : pred.second) m = std::max(m, i);
          return m;
        } else if constexpr (std::is_same_v<T, AffinePredicate>) {
          return static_cast<int>(pred.weights.size()) - 1;
        } else {
          return pred.index;
        }
      },
      p);
}

}  // namespace

std::size_t required_dimension(const Conjunction& psi) {
  int m = -1;
  for (const auto& lit : psi.literals) m = std::max(m, max_index(lit.predicate));
  return static_cast<std::size_t>(m + 1);
}

std::size_t required_dimension(const SequentialFormula& theta) {
  std::size_t dim = 0;
  for (const auto& task : normalize_sequential(theta)) {
    dim = std::max(dim, required_dimension(task.psi));
  }
  return dim;
}

void check_dimension(const Conjunction& psi, std::size_t dim) {
  std::size_t need = required_dimension(psi);
  if (need > dim) {
    throw FormulaError("formula references state index " +
                       std::to_string(need - 1) + " but the state has dimension " +
                       std::to_string(dim));
  }
}

void check_dimension(const SequentialFormula& theta, std::size_t dim) {
  for (const auto& task : normalize_sequential(theta)) check_dimension(task.psi, dim);
}

bool is_concave(const Conjunction& psi) {
  return std::all_of(psi.literals.begin(), psi.literals.end(), [](const Literal& l) {
    return !l.negated || std::holds_alternative<AffinePredicate>(l.predicate);
  });
}

bool is_well_posed(const Conjunction& psi) {
  return std::any_of(psi.literals.begin(), psi.literals.end(), [](const Literal& l) {
    return !l.negated && !std::holds_alternative<AffinePredicate>(l.predicate);
  });
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <typename Range>
std::string join_list(const Range& r) {
  std::string out;
  bool first = true;
  for (const auto& v : r) {
    if (!first) out += ",";
    first = false;
    if constexpr (std::is_integral_v<std::decay_t<decltype(v)>>) {
      out += std::to_string(v);
    } else {
      out += num(v);
    }
  }
  return out;
}

std::string predicate_text(const Predicate& p) {
  return std::visit(
      [](const auto& pred) -> std::string {
        using T = std::decay_t<decltype(pred)>;
        if constexpr (std::is_same_v<T, BallPredicate>) {
          std::vector<double> c(pred.center.data(), pred.center.data() + pred.center.size());
          return "ball(" + join_list(pred.selector) + ";" + join_list(c) + ";" +
                 num(pred.radius) + ")";
        } else if constexpr (std::is_same_v<T, JoinPredicate>) {
          return "join(" + join_list(pred.first) + ";" + join_list(pred.second) + ";" +
                 num(pred.radius) + ")";
        } else if constexpr (std::is_same_v<T, AffinePredicate>) {
          std::vector<double> w(pred.weights.data(), pred.weights.data() + pred.weights.size());
          return "aff(" + join_list(w) + ";" + num(pred.offset) + ")";
        } else {
          return "band(" + std::to_string(pred.index) + ";" + num(pred.center) + ";" +
                 num(pred.halfwidth) + ")";
        }
      },
      p);
}

std::string interval_text(const Interval& iv) {
  return "[" + num(iv.lo) + "," + num(iv.hi) + "]";
}

}  // namespace

std::string to_string(const Conjunction& psi) {
  std::string out;
  for (std::size_t i = 0; i < psi.literals.size(); ++i) {
    if (i > 0) out += " and ";
    if (psi.literals[i].negated) out += "not ";
    out += predicate_text(psi.literals[i].predicate);
  }
  return out;
}

std::string to_string(const SequentialFormula& theta) {
  if (const auto* seq = std::get_if<AtomSequence>(&theta)) {
    std::string out;
    for (std::size_t i = 0; i < seq->atoms.size(); ++i) {
      const auto& atom = seq->atoms[i];
      if (i > 0) out += " and ";
      out += (atom.op == TemporalOp::Always ? "G" : "F");
      out += interval_text(atom.interval) + " " + to_string(atom.body);
    }
    return out;
  }
  const auto& steps = std::get<EventuallyChain>(theta).steps;
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    out += "F" + interval_text(steps[i].interval);
    if (i + 1 < steps.size()) {
      out += "(" + to_string(steps[i].body) + " and ";
    } else {
      out += " " + to_string(steps[i].body);
    }
  }
  out += std::string(steps.size() - 1, ')');
  return out;
}

}  // namespace etstl
