#include "msic/eval/baselines.hpp"

#include <cstdio>

#include "msic/core/errors.hpp"

namespace msic::eval {

BernoulliBaseline BernoulliBaseline::fit(const data::Corpus& train) {
  if (train.records.empty()) {
    throw ValidationError("Bernoulli baseline needs a non-empty corpus");
  }
  BernoulliBaseline out;
  out.vocabs = train.vocabs;
  std::size_t max_visits = 0;
  for (int k = 0; k < 3; ++k) {
    out.rates[k].assign(
        static_cast<std::size_t>(
            train.vocabs.of(static_cast<data::Kind>(k)).size()),
        0.0);
  }
  for (const auto& rec : train.records) {
    max_visits = std::max(max_visits, rec.visits.size());
    for (const auto& visit : rec.visits) {
      for (int k = 0; k < 3; ++k) {
        for (int code : visit.events(static_cast<data::Kind>(k)).indices) {
          out.rates[k][code] += 1.0;
        }
      }
    }
  }
  const double visits = static_cast<double>(train.visit_count());
  for (int k = 0; k < 3; ++k) {
    for (double& r : out.rates[k]) r /= visits;
  }
  out.visit_count_hist.assign(max_visits, 0.0);
  for (const auto& rec : train.records) {
    out.visit_count_hist[rec.visits.size() - 1] += 1.0;
  }
  for (double& p : out.visit_count_hist) {
    p /= static_cast<double>(train.records.size());
  }
  return out;
}

data::Corpus BernoulliBaseline::generate(int count, std::uint64_t seed) const {
  if (count < 1) {
    throw ParameterError("Bernoulli baseline: count must be >= 1");
  }
  data::Corpus out;
  out.vocabs = vocabs;
  Rng master(seed);
  for (int i = 0; i < count; ++i) {
    Rng rng = master.fork(static_cast<std::uint64_t>(i));
    data::PatientRecord rec;
    char buf[24];
    std::snprintf(buf, sizeof(buf), "BL%06d", i);
    rec.patient_id = buf;
    double u = rng.uniform();
    double acc = 0.0;
    std::size_t visits = visit_count_hist.size();
    for (std::size_t v = 0; v < visit_count_hist.size(); ++v) {
      acc += visit_count_hist[v];
      if (u < acc) {
        visits = v + 1;
        break;
      }
    }
    if (visits > visit_count_hist.size()) visits = visit_count_hist.size();
    for (std::size_t v = 0; v < visits; ++v) {
      data::Visit visit;
      for (int k = 0; k < 3; ++k) {
        std::vector<int> picked;
        for (std::size_t code = 0; code < rates[k].size(); ++code) {
          if (rng.bernoulli(rates[k][code])) {
            picked.push_back(static_cast<int>(code));
          }
        }
        visit.events(static_cast<data::Kind>(k)) = data::EventSet::from_indices(
            static_cast<data::Kind>(k), picked,
            static_cast<int>(rates[k].size()));
      }
      rec.visits.push_back(std::move(visit));
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace msic::eval
