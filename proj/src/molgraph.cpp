#include "protomol/molgraph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "protomol/errors.hpp"

namespace protomol {

namespace {

const std::vector<std::string> kElements = {"B", "C", "N",  "O",  "F",
                                            "P", "S", "Cl", "Br", "I"};

const std::vector<std::string> kElementNames = {
    "boron",      "carbon", "nitrogen", "oxygen",  "fluorine",
    "phosphorus", "sulfur", "chlorine", "bromine", "iodine"};

int element_index(const std::string& symbol) {
  for (size_t i = 0; i < kElements.size(); ++i) {
    if (kElements[i] == symbol) return static_cast<int>(i);
  }
  return -1;
}

bool is_aromatic_symbol(char c) {
  return c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p' || c == 's';
}

}  // namespace

const std::vector<std::string>& supported_elements() { return kElements; }

int atom_feature_dim() { return static_cast<int>(kElements.size()) + 4; }

int MolecularGraph::component_count() const {
  const int n = static_cast<int>(atoms.size());
  std::vector<char> seen(n, 0);
  int components = 0;
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++components;
    stack.push_back(s);
    seen[s] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int u : adjacency[v]) {
        if (!seen[u]) {
          seen[u] = 1;
          stack.push_back(u);
        }
      }
    }
  }
  return components;
}

int MolecularGraph::ring_count() const {
  return static_cast<int>(bonds.size()) - static_cast<int>(atoms.size()) +
         component_count();
}

// ---------------------------------------------------------------------------
// SMILES parsing.

namespace {

struct RingOpening {
  int atom = -1;
  std::optional<BondOrder> bond;
};

class SmilesParser {
 public:
  explicit SmilesParser(std::string_view text) : text_(text) {}

  MolecularGraph parse() {
    if (text_.empty()) throw EmptyInput("empty SMILES string");
    while (pos_ < text_.size()) {
      step();
    }
    if (!branch_stack_.empty())
      throw UnbalancedParenthesis("unclosed '(' in SMILES");
    if (!open_rings_.empty())
      throw UnclosedRingBond("ring bond opened but never closed");
    if (pending_bond_.has_value())
      throw UnknownAtomSymbol("dangling bond symbol at end of SMILES");
    if (graph_.atoms.empty()) throw EmptyInput("SMILES contains no atoms");
    graph_.adjacency.assign(graph_.atoms.size(), {});
    for (const Bond& b : graph_.bonds) {
      graph_.adjacency[b.a].push_back(b.b);
      graph_.adjacency[b.b].push_back(b.a);
    }
    return std::move(graph_);
  }

 private:
  void step() {
    const char c = text_[pos_];
    switch (c) {
      case '-': set_bond(BondOrder::Single); ++pos_; return;
      case '=': set_bond(BondOrder::Double); ++pos_; return;
      case '#': set_bond(BondOrder::Triple); ++pos_; return;
      case '(':
        if (prev_atom_ < 0)
          throw UnbalancedParenthesis("branch opened before any atom");
        branch_stack_.push_back(prev_atom_);
        ++pos_;
        return;
      case ')':
        if (branch_stack_.empty())
          throw UnbalancedParenthesis("')' without matching '('");
        prev_atom_ = branch_stack_.back();
        branch_stack_.pop_back();
        ++pos_;
        return;
      case '.':
        if (pending_bond_.has_value())
          throw UnknownAtomSymbol("bond symbol before '.' separator");
        prev_atom_ = -1;
        ++pos_;
        return;
      case '%': {
        if (pos_ + 2 >= text_.size() || !std::isdigit((unsigned char)text_[pos_ + 1]) ||
            !std::isdigit((unsigned char)text_[pos_ + 2]))
          throw UnclosedRingBond("'%' ring closure needs two digits");
        const int id = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
        pos_ += 3;
        ring_bond(id);
        return;
      }
      case '[': parse_bracket_atom(); return;
      default: break;
    }
    if (std::isdigit((unsigned char)c)) {
      ++pos_;
      ring_bond(c - '0');
      return;
    }
    parse_organic_atom();
  }

  void set_bond(BondOrder order) {
    if (pending_bond_.has_value())
      throw UnknownAtomSymbol("two consecutive bond symbols");
    pending_bond_ = order;
  }

  void add_atom(Atom atom) {
    graph_.atoms.push_back(std::move(atom));
    const int idx = static_cast<int>(graph_.atoms.size()) - 1;
    if (prev_atom_ >= 0) {
      add_bond(prev_atom_, idx, take_pending_bond(prev_atom_, idx));
    } else if (pending_bond_.has_value()) {
      throw UnknownAtomSymbol("bond symbol with no preceding atom");
    }
    prev_atom_ = idx;
  }

  BondOrder take_pending_bond(int a, int b) {
    if (pending_bond_.has_value()) {
      const BondOrder o = *pending_bond_;
      pending_bond_.reset();
      return o;
    }
    return default_bond(a, b);
  }

  BondOrder default_bond(int a, int b) const {
    return (graph_.atoms[a].aromatic && graph_.atoms[b].aromatic)
               ? BondOrder::Aromatic
               : BondOrder::Single;
  }

  void add_bond(int a, int b, BondOrder order) {
    if (a == b) throw UnclosedRingBond("ring bond closes on its own atom");
    for (const Bond& e : graph_.bonds) {
      if ((e.a == a && e.b == b) || (e.a == b && e.b == a))
        throw UnclosedRingBond("duplicate bond between the same atoms");
    }
    graph_.bonds.push_back({a, b, order});
  }

  void ring_bond(int id) {
    if (prev_atom_ < 0)
      throw UnclosedRingBond("ring closure digit with no preceding atom");
    auto it = open_rings_.find(id);
    if (it == open_rings_.end()) {
      RingOpening opening;
      opening.atom = prev_atom_;
      opening.bond = pending_bond_;
      pending_bond_.reset();
      open_rings_[id] = opening;
      return;
    }
    const RingOpening opening = it->second;
    open_rings_.erase(it);
    BondOrder order;
    if (opening.bond.has_value()) {
      order = *opening.bond;
      pending_bond_.reset();
    } else if (pending_bond_.has_value()) {
      order = *pending_bond_;
      pending_bond_.reset();
    } else {
      order = default_bond(opening.atom, prev_atom_);
    }
    add_bond(opening.atom, prev_atom_, order);
  }

  void parse_organic_atom() {
    const char c = text_[pos_];
    Atom atom;
    if (std::isupper((unsigned char)c)) {
      // Two-letter symbols first.
      if (pos_ + 1 < text_.size()) {
        const std::string two = {c, text_[pos_ + 1]};
        if (two == "Cl" || two == "Br") {
          atom.element = two;
          pos_ += 2;
          add_atom(std::move(atom));
          return;
        }
      }
      const std::string one(1, c);
      if (element_index(one) < 0)
        throw UnknownAtomSymbol("unsupported atom symbol '" + one + "'");
      atom.element = one;
      ++pos_;
      add_atom(std::move(atom));
      return;
    }
    if (is_aromatic_symbol(c)) {
      atom.element = std::string(1, static_cast<char>(std::toupper((unsigned char)c)));
      atom.aromatic = true;
      ++pos_;
      add_atom(std::move(atom));
      return;
    }
    throw UnknownAtomSymbol("unsupported character '" + std::string(1, c) +
                            "' in SMILES");
  }

  void parse_bracket_atom() {
    const size_t close = text_.find(']', pos_);
    if (close == std::string_view::npos)
      throw UnknownAtomSymbol("unterminated '[' atom");
    std::string_view body = text_.substr(pos_ + 1, close - pos_ - 1);
    pos_ = close + 1;
    if (body.empty()) throw UnknownAtomSymbol("empty bracket atom");

    size_t i = 0;
    if (std::isdigit((unsigned char)body[0]))
      throw UnknownAtomSymbol("isotope specifications are unsupported");

    Atom atom;
    if (std::isupper((unsigned char)body[i])) {
      std::string sym(1, body[i]);
      if (i + 1 < body.size() && std::islower((unsigned char)body[i + 1])) {
        const std::string two = sym + body[i + 1];
        if (element_index(two) >= 0) {
          sym = two;
          ++i;
        }
      }
      if (element_index(sym) < 0)
        throw UnknownAtomSymbol("unsupported atom symbol '" + sym + "'");
      atom.element = sym;
      ++i;
    } else if (is_aromatic_symbol(body[i])) {
      atom.element = std::string(1, static_cast<char>(std::toupper((unsigned char)body[i])));
      atom.aromatic = true;
      ++i;
    } else {
      throw UnknownAtomSymbol("unsupported bracket atom '" + std::string(body) + "'");
    }

    // Optional hydrogen count, then optional charge.
    if (i < body.size() && body[i] == 'H') {
      ++i;
      int count = 1;
      if (i < body.size() && std::isdigit((unsigned char)body[i])) {
        count = body[i] - '0';
        ++i;
      }
      atom.explicit_h = count;
    }
    if (i < body.size() && (body[i] == '+' || body[i] == '-')) {
      const char sign_char = body[i];
      const int sign = sign_char == '+' ? 1 : -1;
      int magnitude = 1;
      ++i;
      if (i < body.size() && std::isdigit((unsigned char)body[i])) {
        magnitude = body[i] - '0';
        ++i;
      } else {
        while (i < body.size() && body[i] == sign_char) {
          ++magnitude;
          ++i;
        }
      }
      atom.formal_charge = sign * magnitude;
      if (atom.formal_charge < -2 || atom.formal_charge > 2)
        throw UnknownAtomSymbol("formal charge outside [-2, +2]");
    }
    if (i != body.size())
      throw UnknownAtomSymbol("unsupported bracket atom content '" +
                              std::string(body) + "'");
    add_atom(std::move(atom));
  }

  std::string_view text_;
  size_t pos_ = 0;
  MolecularGraph graph_;
  int prev_atom_ = -1;
  std::optional<BondOrder> pending_bond_;
  std::vector<int> branch_stack_;
  std::map<int, RingOpening> open_rings_;
};

}  // namespace

MolecularGraph parse_smiles(std::string_view text) {
  return SmilesParser(text).parse();
}

// ---------------------------------------------------------------------------
// Featurization.

Tensor featurize(const MolecularGraph& graph) {
  const int n = static_cast<int>(graph.atoms.size());
  const int d = atom_feature_dim();
  const int ne = static_cast<int>(kElements.size());
  Tensor x(n, d);
  for (int v = 0; v < n; ++v) {
    const Atom& a = graph.atoms[v];
    x.at(v, element_index(a.element)) = 1.0;
    x.at(v, ne) = a.aromatic ? 1.0 : 0.0;
    x.at(v, ne + 1) = graph.degree(v) / 4.0;
    x.at(v, ne + 2) = a.formal_charge;
    x.at(v, ne + 3) = a.explicit_h / 4.0;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Description template.

namespace {

bool has_single_bond_only(const MolecularGraph& g, int v) {
  for (const Bond& b : g.bonds) {
    if (b.a == v || b.b == v) {
      if (b.order != BondOrder::Single) return false;
    }
  }
  return true;
}

bool bonded_with_order(const MolecularGraph& g, int v, const std::string& element,
                       BondOrder order) {
  for (const Bond& b : g.bonds) {
    int other = -1;
    if (b.a == v) other = b.b;
    if (b.b == v) other = b.a;
    if (other >= 0 && b.order == order && g.atoms[other].element == element)
      return true;
  }
  return false;
}

bool is_hydroxyl_oxygen(const MolecularGraph& g, int v) {
  const Atom& a = g.atoms[v];
  if (a.element != "O" || a.aromatic || a.formal_charge != 0) return false;
  if (a.explicit_h >= 1) return true;
  return g.degree(v) == 1 && has_single_bond_only(g, v);
}

bool is_carbonyl_carbon(const MolecularGraph& g, int v) {
  return g.atoms[v].element == "C" &&
         bonded_with_order(g, v, "O", BondOrder::Double);
}

bool is_carboxyl_carbon(const MolecularGraph& g, int v) {
  if (!is_carbonyl_carbon(g, v)) return false;
  for (int u : g.adjacency[v]) {
    if (is_hydroxyl_oxygen(g, u)) return true;
  }
  return false;
}

}  // namespace

std::string generate_description(const MolecularGraph& graph) {
  std::vector<int> counts(kElements.size(), 0);
  bool any_aromatic = false;
  for (const Atom& a : graph.atoms) {
    counts[element_index(a.element)]++;
    any_aromatic = any_aromatic || a.aromatic;
  }

  std::vector<std::string> parts;
  for (size_t e = 0; e < kElements.size(); ++e) {
    if (counts[e] > 0) {
      parts.push_back(std::to_string(counts[e]) + " " + kElementNames[e] +
                      " atoms");
    }
  }
  parts.push_back(std::to_string(graph.ring_count()) + " rings");
  if (any_aromatic) parts.push_back("aromatic system");

  bool hydroxyl = false, carbonyl = false, carboxyl = false, amine = false,
       halogen = false;
  for (int v = 0; v < static_cast<int>(graph.atoms.size()); ++v) {
    const Atom& a = graph.atoms[v];
    hydroxyl = hydroxyl || is_hydroxyl_oxygen(graph, v);
    carbonyl = carbonyl || is_carbonyl_carbon(graph, v);
    carboxyl = carboxyl || is_carboxyl_carbon(graph, v);
    amine = amine || (a.element == "N" && !a.aromatic &&
                      has_single_bond_only(graph, v));
    halogen = halogen || a.element == "F" || a.element == "Cl" ||
              a.element == "Br" || a.element == "I";
  }
  if (hydroxyl) parts.push_back("hydroxyl group");
  if (carbonyl) parts.push_back("carbonyl group");
  if (carboxyl) parts.push_back("carboxyl group");
  if (amine) parts.push_back("amine group");
  if (halogen) parts.push_back("halogen substituent");

  std::string text = "molecule with";
  for (size_t i = 0; i < parts.size(); ++i) {
    text += (i == 0 ? " " : " , ") + parts[i];
  }
  return text;
}

// ---------------------------------------------------------------------------
// Dataset ingestion.

namespace {

// Minimal quote-aware CSV field splitter.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  size_t e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

}  // namespace

Dataset load_dataset(const std::string& path, TaskKind kind) {
  std::ifstream in(path);
  if (!in) throw UnreadableFile("cannot open dataset file '" + path + "'");

  std::string line;
  if (!std::getline(in, line))
    throw UnreadableFile("dataset file '" + path + "' is empty");

  const std::vector<std::string> header = split_csv_line(line);
  int smiles_col = -1, target_col = -1, desc_col = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    const std::string name = trim(header[i]);
    if (name == "smiles") smiles_col = static_cast<int>(i);
    if (name == "target") target_col = static_cast<int>(i);
    if (name == "description") desc_col = static_cast<int>(i);
  }
  if (smiles_col < 0) throw MissingColumn("dataset is missing column 'smiles'");
  if (target_col < 0) throw MissingColumn("dataset is missing column 'target'");

  Dataset out;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) <= std::max(smiles_col, target_col)) {
      out.skipped++;
      continue;
    }
    DatasetRecord rec;
    rec.smiles = trim(fields[smiles_col]);

    const std::string target_text = trim(fields[target_col]);
    double target = 0.0;
    try {
      size_t consumed = 0;
      target = std::stod(target_text, &consumed);
      if (consumed != target_text.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      if (kind == TaskKind::Regression)
        throw NonNumericTarget("non-numeric regression target '" + target_text + "'");
      throw NonIntegerTarget("non-integer class label '" + target_text + "'");
    }
    if (kind == TaskKind::Classification && target != std::floor(target))
      throw NonIntegerTarget("non-integer class label '" + target_text + "'");
    rec.target = target;

    MolecularGraph graph;
    try {
      graph = parse_smiles(rec.smiles);
    } catch (const Error&) {
      out.skipped++;
      continue;
    }

    if (desc_col >= 0 && desc_col < static_cast<int>(fields.size()) &&
        !trim(fields[desc_col]).empty()) {
      rec.description = trim(fields[desc_col]);
    } else {
      rec.description = generate_description(graph);
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace protomol
