#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "protomol/errors.hpp"
#include "protomol/molgraph.hpp"

using namespace protomol;

namespace {

bool has_bond(const MolecularGraph& g, int a, int b, BondOrder order) {
  for (const Bond& e : g.bonds) {
    if (((e.a == a && e.b == b) || (e.a == b && e.b == a)) && e.order == order)
      return true;
  }
  return false;
}

std::string write_temp_csv(const std::string& name, const std::string& body) {
  const std::string path = "/tmp/" + name;
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("single atom") {
  const MolecularGraph g = parse_smiles("C");
  CHECK(g.atoms.size() == 1);
  CHECK(g.bonds.empty());
  CHECK(g.atoms[0].element == "C");
  CHECK_FALSE(g.atoms[0].aromatic);
}

TEST_CASE("linear chain CCO") {
  const MolecularGraph g = parse_smiles("CCO");
  REQUIRE(g.atoms.size() == 3);
  CHECK(g.bonds.size() == 2);
  CHECK(has_bond(g, 0, 1, BondOrder::Single));
  CHECK(has_bond(g, 1, 2, BondOrder::Single));
  CHECK(g.atoms[2].element == "O");
}

TEST_CASE("cyclopropane ring closure") {
  const MolecularGraph g = parse_smiles("C1CC1");
  REQUIRE(g.atoms.size() == 3);
  CHECK(g.bonds.size() == 3);
  CHECK(has_bond(g, 0, 1, BondOrder::Single));
  CHECK(has_bond(g, 1, 2, BondOrder::Single));
  CHECK(has_bond(g, 0, 2, BondOrder::Single));
  CHECK(g.ring_count() == 1);
}

TEST_CASE("benzene is an aromatic 6-cycle") {
  const MolecularGraph g = parse_smiles("c1ccccc1");
  REQUIRE(g.atoms.size() == 6);
  CHECK(g.bonds.size() == 6);
  for (const Atom& a : g.atoms) {
    CHECK(a.element == "C");
    CHECK(a.aromatic);
  }
  for (const Bond& b : g.bonds) CHECK(b.order == BondOrder::Aromatic);
}

TEST_CASE("bond orders, branches, and two-letter elements") {
  const MolecularGraph g = parse_smiles("CC(=O)Cl");
  REQUIRE(g.atoms.size() == 4);
  CHECK(has_bond(g, 1, 2, BondOrder::Double));
  CHECK(has_bond(g, 1, 3, BondOrder::Single));
  CHECK(g.atoms[3].element == "Cl");
  CHECK(parse_smiles("C#N").bonds[0].order == BondOrder::Triple);
}

TEST_CASE("bracket atoms carry charge and explicit hydrogens") {
  const MolecularGraph g = parse_smiles("[NH4+]");
  REQUIRE(g.atoms.size() == 1);
  CHECK(g.atoms[0].element == "N");
  CHECK(g.atoms[0].explicit_h == 4);
  CHECK(g.atoms[0].formal_charge == 1);

  const MolecularGraph o = parse_smiles("[O-]");
  CHECK(o.atoms[0].formal_charge == -1);
  CHECK(parse_smiles("[O--]").atoms[0].formal_charge == -2);
  CHECK(parse_smiles("[N+2]").atoms[0].formal_charge == 2);
  CHECK(parse_smiles("[nH]").atoms[0].aromatic);
}

TEST_CASE("disconnected components via dot") {
  const MolecularGraph g = parse_smiles("CC.O");
  CHECK(g.atoms.size() == 3);
  CHECK(g.bonds.size() == 1);
  CHECK(g.component_count() == 2);
  CHECK(g.ring_count() == 0);
}

TEST_CASE("percent ring closures") {
  const MolecularGraph g = parse_smiles("C%12CC%12");
  CHECK(g.bonds.size() == 3);
}

TEST_CASE("parser error taxonomy") {
  CHECK_THROWS_AS(parse_smiles(""), EmptyInput);
  CHECK_THROWS_AS(parse_smiles("C1CC"), UnclosedRingBond);
  CHECK_THROWS_AS(parse_smiles("C(C"), UnbalancedParenthesis);
  CHECK_THROWS_AS(parse_smiles("CC)"), UnbalancedParenthesis);
  CHECK_THROWS_AS(parse_smiles("CXC"), UnknownAtomSymbol);
  CHECK_THROWS_AS(parse_smiles("C/C=C/C"), UnknownAtomSymbol);   // stereo bond
  CHECK_THROWS_AS(parse_smiles("[C@H](C)C"), UnknownAtomSymbol); // chirality
  CHECK_THROWS_AS(parse_smiles("[13C]"), UnknownAtomSymbol);     // isotope
  CHECK_THROWS_AS(parse_smiles("*CC"), UnknownAtomSymbol);       // wildcard
  CHECK_THROWS_AS(parse_smiles("[Zn]"), UnknownAtomSymbol);
  CHECK_THROWS_AS(parse_smiles("C="), UnknownAtomSymbol);
}

TEST_CASE("adjacency is symmetric and bounds-checked") {
  const MolecularGraph g = parse_smiles("CC(C)(C)O");
  const int n = static_cast<int>(g.atoms.size());
  for (int v = 0; v < n; ++v) {
    for (int u : g.adjacency[v]) {
      CHECK(u >= 0);
      CHECK(u < n);
      bool back = false;
      for (int w : g.adjacency[u]) back = back || w == v;
      CHECK(back);
    }
  }
}

TEST_CASE("atom token count matches parsed atom count") {
  // Round-trip property over a small corpus of subset strings.
  const std::vector<std::pair<std::string, int>> cases = {
      {"C", 1},      {"CCO", 3},     {"C1CC1", 3},     {"c1ccccc1", 6},
      {"CC(=O)O", 4}, {"[NH4+]", 1}, {"ClCCl", 3},     {"C#CC", 3},
      {"CC.CC", 4},  {"N(C)C", 3},   {"c1ccncc1", 6},  {"BrCBr", 3}};
  for (const auto& [smiles, atoms] : cases) {
    CAPTURE(smiles);
    CHECK(parse_smiles(smiles).atoms.size() == size_t(atoms));
  }
}

TEST_CASE("featurize layout for a lone carbon") {
  const MolecularGraph g = parse_smiles("C");
  const Tensor x = featurize(g);
  REQUIRE(x.rows() == 1);
  REQUIRE(x.cols() == atom_feature_dim());
  // One-hot carbon is element slot 1.
  CHECK(x.at(0, 1) == 1.0);
  double onehot_sum = 0.0;
  for (size_t e = 0; e < supported_elements().size(); ++e)
    onehot_sum += x.at(0, static_cast<int>(e));
  CHECK(onehot_sum == 1.0);
  // aromatic, degree, charge, hydrogens all zero
  for (int j = 10; j < 14; ++j) CHECK(x.at(0, j) == 0.0);
}

TEST_CASE("degree feature of the middle atom of CCO is 0.5") {
  const Tensor x = featurize(parse_smiles("CCO"));
  CHECK(x.at(1, 11) == 0.5);  // 2 neighbors / 4
  CHECK(x.at(0, 11) == 0.25);
}

TEST_CASE("benzene atoms are aromatic with degree 0.5") {
  const Tensor x = featurize(parse_smiles("c1ccccc1"));
  for (int v = 0; v < 6; ++v) {
    CHECK(x.at(v, 10) == 1.0);
    CHECK(x.at(v, 11) == 0.5);
  }
}

TEST_CASE("featurize row depends only on the atom and its degree") {
  // Same local situation in different molecules gives the same row.
  const Tensor a = featurize(parse_smiles("CCO"));
  const Tensor b = featurize(parse_smiles("NCO"));
  for (int j = 0; j < a.cols(); ++j) CHECK(a.at(2, j) == b.at(2, j));
}

TEST_CASE("description of a lone carbon") {
  CHECK(generate_description(parse_smiles("C")) ==
        "molecule with 1 carbon atoms , 0 rings");
}

TEST_CASE("description of ethanol mentions carbons and hydroxyl") {
  const std::string text = generate_description(parse_smiles("CCO"));
  CHECK(text.find("2 carbon") != std::string::npos);
  CHECK(text.find("hydroxyl") != std::string::npos);
}

TEST_CASE("description of benzene mentions the aromatic ring") {
  const std::string text = generate_description(parse_smiles("c1ccccc1"));
  CHECK(text.find("aromatic") != std::string::npos);
  CHECK(text.find("1 rings") != std::string::npos);
}

TEST_CASE("functional group table") {
  CHECK(generate_description(parse_smiles("CC=O")).find("carbonyl") !=
        std::string::npos);
  CHECK(generate_description(parse_smiles("CC(=O)O")).find("carboxyl") !=
        std::string::npos);
  CHECK(generate_description(parse_smiles("CN")).find("amine") !=
        std::string::npos);
  CHECK(generate_description(parse_smiles("CCl")).find("halogen") !=
        std::string::npos);
  CHECK(generate_description(parse_smiles("CCC")).find("hydroxyl") ==
        std::string::npos);
}

TEST_CASE("description is deterministic") {
  const std::string a = generate_description(parse_smiles("CC(=O)Nc1ccccc1"));
  const std::string b = generate_description(parse_smiles("CC(=O)Nc1ccccc1"));
  CHECK(a == b);
}

TEST_CASE("dataset loads valid rows") {
  const std::string path = write_temp_csv(
      "molgraph_ok.csv", "smiles,target\nC,0\nCCO,1\nc1ccccc1,0\n");
  const Dataset d = load_dataset(path, TaskKind::Classification);
  CHECK(d.records.size() == 3);
  CHECK(d.skipped == 0);
  CHECK(d.records[1].target == 1.0);
  CHECK(d.records[1].description.find("hydroxyl") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("unparsable SMILES rows are dropped and counted") {
  const std::string path = write_temp_csv(
      "molgraph_skip.csv", "smiles,target\nC1CC,0\nCCO,1\n");
  const Dataset d = load_dataset(path, TaskKind::Classification);
  CHECK(d.records.size() == 1);
  CHECK(d.skipped == 1);
  std::remove(path.c_str());
}

TEST_CASE("dataset errors") {
  const std::string no_target =
      write_temp_csv("molgraph_col.csv", "smiles,label\nC,0\n");
  CHECK_THROWS_AS(load_dataset(no_target, TaskKind::Classification),
                  MissingColumn);
  std::remove(no_target.c_str());

  CHECK_THROWS_AS(load_dataset("/nonexistent/x.csv", TaskKind::Regression),
                  UnreadableFile);

  const std::string bad_num =
      write_temp_csv("molgraph_num.csv", "smiles,target\nC,abc\n");
  CHECK_THROWS_AS(load_dataset(bad_num, TaskKind::Regression), NonNumericTarget);
  std::remove(bad_num.c_str());

  const std::string bad_int =
      write_temp_csv("molgraph_int.csv", "smiles,target\nC,0.5\n");
  CHECK_THROWS_AS(load_dataset(bad_int, TaskKind::Classification),
                  NonIntegerTarget);
  std::remove(bad_int.c_str());
}

TEST_CASE("explicit description column wins over generation") {
  const std::string path = write_temp_csv(
      "molgraph_desc.csv", "smiles,target,description\nC,0,a custom text\n");
  const Dataset d = load_dataset(path, TaskKind::Classification);
  CHECK(d.records[0].description == "a custom text");
  std::remove(path.c_str());
}
