#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace drld {

struct GradcheckOptions {
  int batches = 20;
  int batch_size = 4;
  int probes_per_tensor = 12;  // coordinates sampled from each parameter tensor
  double step = 1e-5;          // central difference half-width
  double tolerance = 1e-4;     // on the relative error
  double floor = 1e-6;         // relative error denominator floor
  int hidden = 256;
  int dims = 2;
  std::uint64_t seed = 2024;
};

struct GradcheckSuite {
  std::string name;
  double max_rel_error = 0.0;
  std::string worst;  // tensor[index] with the largest error
  std::int64_t probes = 0;
  std::int64_t skipped = 0;  // probes whose perturbation flipped a ReLU
  double tolerance = 1e-4;

  bool passed() const { return probes > 0 && max_rel_error < tolerance; }
};

struct GradcheckReport {
  std::vector<GradcheckSuite> suites;

  bool passed() const;
};

// Compares analytic gradients of the encoder, actor loss and critic loss with
// central finite differences on random states and transitions.
GradcheckReport run_gradcheck(const GradcheckOptions& options = {});

}  // namespace drld
