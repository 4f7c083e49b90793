#include <algorithm>
#include <random>
#include <string>

#include "crystal_flow/analysis.hpp"
#include "crystal_flow/error.hpp"

namespace crystal_flow {

AdmissibleCurve random_closed_curve(std::shared_ptr<const Anisotropy> a, int segments, int index, std::uint64_t seed,
                                    double min_length) {
  const int nf = a->facet_count();
  const int winding = index * nf;
  if (segments < 3 || std::abs(winding) > segments || (segments - winding) % 2 != 0)
    throw Error(ErrorKind::ParamOutOfRange, "no step word with " + std::to_string(segments) + " segments and index " +
                                                std::to_string(index));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> len(0.5, 2.0);
  const int plus = (segments + winding) / 2;

  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<int> steps(segments, -1);
    std::fill(steps.begin(), steps.begin() + plus, 1);
    std::shuffle(steps.begin(), steps.end(), rng);
    std::vector<int> facets{static_cast<int>(rng() % nf)};
    for (int k = 1; k < segments; ++k) facets.push_back(((facets.back() + steps[k]) % nf + nf) % nf);

    Eigen::Matrix2Xd T(2, segments);
    for (int i = 0; i < segments; ++i) T.col(i) = a->facet(facets[i]).tangent;
    const Eigen::Matrix2d G = T * T.transpose();
    if (std::abs(G.determinant()) < 1e-6) continue;
    for (int tries = 0; tries < 20; ++tries) {
      Vector L(segments);
      for (int i = 0; i < segments; ++i) L[i] = len(rng);
      L -= T.transpose() * G.ldlt().solve(T * L);
      if (L.minCoeff() < min_length) continue;
      std::vector<double> lengths(L.data(), L.data() + segments);
      return make_closed_from_facets(a, facets, lengths, Vec2::Zero());
    }
  }
  throw Error(ErrorKind::ParamOutOfRange, "could not draw a random closed curve");
}

}  // namespace crystal_flow
