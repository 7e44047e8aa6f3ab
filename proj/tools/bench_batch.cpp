// Benchmark of the batch gradient kernel: serial reference vs OpenMP over
// samples. The blocked reduction is order-fixed, so both paths must agree
// bitwise; the benchmark verifies that while timing.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "protomol/model.hpp"
#include "protomol/rng.hpp"
#include "protomol/trainer.hpp"

using namespace protomol;

namespace {

std::vector<DatasetRecord> synthetic_records(int count, uint64_t seed) {
  Rng rng(seed, "bench.molecules");
  const std::vector<std::string> elements = {"C", "N", "O", "S", "F"};
  std::vector<DatasetRecord> records;
  for (int i = 0; i < count; ++i) {
    const int len = 4 + int(rng.below(8));
    std::string smiles;
    for (int a = 0; a < len; ++a) smiles += elements[rng.below(elements.size())];
    DatasetRecord rec;
    rec.smiles = smiles;
    rec.target = double(i % 2);
    rec.description = generate_description(parse_smiles(smiles));
    records.push_back(std::move(rec));
  }
  return records;
}

double run_once(const Model& model, const std::vector<PreparedSample>& batch,
                int workers, BatchGradients* out) {
  const auto t0 = std::chrono::steady_clock::now();
  *out = batch_gradients(model, batch, workers);
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const int batch_size = argc > 1 ? std::atoi(argv[1]) : 128;
  const int threads = argc > 2 ? std::atoi(argv[2]) : omp_get_max_threads();

  TrainConfig config;
  config.layers = 3;
  config.graph_dim = 64;
  config.text_dim = 64;
  config.proto_dim = 64;

  const std::vector<DatasetRecord> records = synthetic_records(batch_size, 7);
  std::vector<std::string> corpus;
  for (const auto& r : records) corpus.push_back(r.description);
  Model model = Model::init(config, Vocabulary::build(corpus));

  std::vector<PreparedSample> batch;
  for (const auto& r : records) batch.push_back(prepare_sample(r, model.vocab));

  BatchGradients serial, parallel;
  // Warm-up pass so both timed runs see hot caches.
  run_once(model, batch, 0, &serial);

  const double t_serial = run_once(model, batch, 0, &serial);
  const double t_parallel = run_once(model, batch, threads, &parallel);

  double max_diff = 0.0;
  for (size_t i = 0; i < serial.grads.size(); ++i) {
    for (int j = 0; j < serial.grads[i].size(); ++j) {
      max_diff = std::max(
          max_diff, std::fabs(serial.grads[i][j] - parallel.grads[i][j]));
    }
  }

  std::printf("batch=%d threads=%d\n", batch_size, threads);
  std::printf("serial    %8.3f ms\n", 1e3 * t_serial);
  std::printf("parallel  %8.3f ms\n", 1e3 * t_parallel);
  std::printf("speedup   %8.2fx\n", t_serial / t_parallel);
  std::printf("loss diff %g, max grad diff %g\n",
              std::fabs(serial.loss - parallel.loss), max_diff);
  return max_diff == 0.0 && serial.loss == parallel.loss ? 0 : 1;
}
