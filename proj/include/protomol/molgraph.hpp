#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "protomol/tensor.hpp"

namespace protomol {

enum class BondOrder { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

struct Atom {
  std::string element;     // one of B C N O F P S Cl Br I
  bool aromatic = false;
  int formal_charge = 0;   // in [-2, +2]
  int explicit_h = 0;
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::Single;
};

struct MolecularGraph {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::vector<std::vector<int>> adjacency;  // symmetric neighbor lists

  int degree(int atom) const { return static_cast<int>(adjacency[atom].size()); }
  int component_count() const;
  // Cycle rank |E| - |V| + components.
  int ring_count() const;
};

// Supported element symbols, in feature/one-hot order.
const std::vector<std::string>& supported_elements();

// Width of the featurize() output: one-hot elements + aromatic + degree +
// charge + explicit H.
int atom_feature_dim();

// Parse the SMILES subset: organic-subset and bracket atoms (charge, H
// count), bonds - = #, aromatic lowercase, branches, ring closures 1-9 and
// %nn, and '.' disconnection. Stereochemistry, isotopes, and wildcards are
// rejected.
MolecularGraph parse_smiles(std::string_view text);

// One row per atom: [one-hot element | aromatic | degree/4 | charge | H/4].
Tensor featurize(const MolecularGraph& graph);

// Deterministic template text: per-element atom counts, ring count, aromatic
// presence, and functional-group hits. Same graph, same bytes.
std::string generate_description(const MolecularGraph& graph);

enum class TaskKind { Classification, Regression };

struct DatasetRecord {
  std::string smiles;
  double target = 0.0;  // class label (integral) or regression value
  std::string description;
};

struct Dataset {
  std::vector<DatasetRecord> records;
  int skipped = 0;  // rows dropped because their SMILES failed to parse
};

// CSV with header columns `smiles`, `target`, optional `description`.
// Unparsable SMILES rows are dropped and counted; missing descriptions are
// generated from the parsed graph.
Dataset load_dataset(const std::string& path, TaskKind kind);

}  // namespace protomol
