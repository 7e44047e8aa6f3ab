#pragma once

// Synthetic molecule sets shared by the trainer, CLI, and acceptance tests.

#include <cmath>
#include <string>
#include <vector>

#include "protomol/config.hpp"
#include "protomol/molgraph.hpp"
#include "protomol/rng.hpp"

namespace toy {

// Random subset-grammar molecule: a short heavy-atom chain with an optional
// branch and optional ring closure. Positives contain at least one oxygen,
// negatives none.
inline std::string make_smiles(protomol::Rng& rng, bool with_oxygen) {
  const std::vector<std::string> pool = {"C", "C", "C", "C", "N", "S"};
  const int chain = 3 + int(rng.below(6));
  std::vector<std::string> atoms;
  for (int i = 0; i < chain; ++i) atoms.push_back(pool[rng.below(pool.size())]);
  if (with_oxygen) atoms[rng.below(atoms.size())] = "O";

  const bool ring = chain >= 4 && rng.uniform() < 0.4;
  const bool branch = rng.uniform() < 0.5;
  const int branch_at = 1 + int(rng.below(std::max(1, chain - 2)));

  std::string smiles = atoms[0];
  if (ring) smiles += "1";
  for (int i = 1; i < chain; ++i) {
    smiles += atoms[i];
    if (branch && i == branch_at) smiles += "(C)";
  }
  if (ring) smiles += "1";
  return smiles;
}

inline protomol::DatasetRecord record_from(const std::string& smiles,
                                           double target) {
  protomol::DatasetRecord rec;
  rec.smiles = smiles;
  rec.target = target;
  rec.description =
      protomol::generate_description(protomol::parse_smiles(smiles));
  return rec;
}

// Balanced classification set, label = contains oxygen.
inline std::vector<protomol::DatasetRecord> classification_records(
    int count, uint64_t seed) {
  protomol::Rng rng(seed, "toy.classification");
  std::vector<protomol::DatasetRecord> records;
  for (int i = 0; i < count; ++i) {
    const bool positive = i % 2 == 0;
    records.push_back(record_from(make_smiles(rng, positive),
                                  positive ? 1.0 : 0.0));
  }
  return records;
}

// Regression set, target = heavy-atom count standardized over the set.
inline std::vector<protomol::DatasetRecord> regression_records(int count,
                                                               uint64_t seed) {
  protomol::Rng rng(seed, "toy.regression");
  std::vector<std::string> smiles;
  std::vector<double> counts;
  for (int i = 0; i < count; ++i) {
    smiles.push_back(make_smiles(rng, rng.uniform() < 0.5));
    counts.push_back(
        double(protomol::parse_smiles(smiles.back()).atoms.size()));
  }
  double mean = 0.0;
  for (double c : counts) mean += c;
  mean /= double(count);
  double var = 0.0;
  for (double c : counts) var += (c - mean) * (c - mean);
  var /= double(count);
  const double std_dev = var > 0.0 ? std::sqrt(var) : 1.0;

  std::vector<protomol::DatasetRecord> records;
  for (int i = 0; i < count; ++i)
    records.push_back(record_from(smiles[i], (counts[i] - mean) / std_dev));
  return records;
}

// Desk-scale toy run configuration; the learning rate is raised from the
// full-scale default so a few hundred steps can actually fit 50-ish samples.
inline protomol::TrainConfig config(protomol::TaskKind kind) {
  protomol::TrainConfig c;
  c.task_kind = kind;
  c.classes = kind == protomol::TaskKind::Classification ? 2 : 1;
  c.layers = 2;
  c.graph_dim = 32;
  c.text_dim = 32;
  c.proto_dim = 32;
  c.lr = 3e-3;
  c.batch_size = 16;
  c.seed = 7;
  return c;
}

}  // namespace toy
