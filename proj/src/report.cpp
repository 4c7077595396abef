#include "prefixgan/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace prefixgan {

std::string format_double(double v) {
  char buf[64];
  // Shortest representation that still round-trips a double.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_epochs_csv(const std::filesystem::path& file, const RunSeries& series) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("write_epochs_csv: cannot open " + file.string());
  os << "epoch,phase,nll_oracle,nll_gen,d_loss,g_objective,wall_s";
  if (series.has_tau) os << ",tau";
  os << "\n";
  for (const auto& r : series.rows) {
    os << r.epoch << ',' << r.phase << ',';
    if (r.nll_oracle) os << format_double(*r.nll_oracle);
    os << ',' << format_double(r.nll_gen) << ',' << format_double(r.d_loss) << ','
       << format_double(r.g_objective) << ',' << format_double(r.wall_s);
    if (series.has_tau) os << ',' << (r.tau ? format_double(*r.tau) : "");
    os << "\n";
  }
}

void write_final_csv(const std::filesystem::path& file, const MetricRecord& rec) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("write_final_csv: cannot open " + file.string());
  os << "bleu2,bleu3,bleu4,bleu5,nll_gen,nll_oracle,n_samples,convention_id\n";
  os << format_double(rec.bleu2) << ',' << format_double(rec.bleu3) << ','
     << format_double(rec.bleu4) << ',' << format_double(rec.bleu5) << ','
     << format_double(rec.nll_gen) << ',';
  if (rec.nll_oracle) os << format_double(*rec.nll_oracle);
  os << ',' << rec.n_samples << ',' << rec.convention_id << "\n";
}

MetricRecord read_final_csv(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("read_final_csv: cannot open " + file.string());
  std::string header, line;
  if (!std::getline(is, header) || !std::getline(is, line))
    throw std::runtime_error("read_final_csv: malformed file " + file.string());
  if (header != "bleu2,bleu3,bleu4,bleu5,nll_gen,nll_oracle,n_samples,convention_id")
    throw std::runtime_error("read_final_csv: unexpected schema in " + file.string());
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ls(line);
  while (std::getline(ls, cell, ',')) cells.push_back(cell);
  while (cells.size() < 8) cells.push_back("");
  MetricRecord rec;
  rec.bleu2 = std::stod(cells[0]);
  rec.bleu3 = std::stod(cells[1]);
  rec.bleu4 = std::stod(cells[2]);
  rec.bleu5 = std::stod(cells[3]);
  rec.nll_gen = std::stod(cells[4]);
  if (!cells[5].empty()) rec.nll_oracle = std::stod(cells[5]);
  rec.n_samples = std::stoi(cells[6]);
  rec.convention_id = cells[7];
  return rec;
}

namespace {

struct MetricView {
  std::string name;
  bool lower_is_better;
  std::vector<double> values;
};

std::vector<MetricView> metric_views(const std::vector<SeedFinal>& finals) {
  std::vector<MetricView> views = {
      {"bleu2", false, {}}, {"bleu3", false, {}}, {"bleu4", false, {}},
      {"bleu5", false, {}}, {"nll_gen", true, {}},
  };
  const bool with_oracle = !finals.empty() && finals[0].record.nll_oracle.has_value();
  if (with_oracle) views.push_back({"nll_oracle", true, {}});
  for (const auto& f : finals) {
    if (f.record.nll_oracle.has_value() != with_oracle)
      throw std::runtime_error("metric schema mismatch: inconsistent nll_oracle presence");
    views[0].values.push_back(f.record.bleu2);
    views[1].values.push_back(f.record.bleu3);
    views[2].values.push_back(f.record.bleu4);
    views[3].values.push_back(f.record.bleu5);
    views[4].values.push_back(f.record.nll_gen);
    if (with_oracle) views[5].values.push_back(*f.record.nll_oracle);
  }
  return views;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {mean, sd};
}

}  // namespace

void write_aggregate_csv(const std::filesystem::path& file,
                         const std::vector<SeedFinal>& finals) {
  if (finals.empty()) throw std::invalid_argument("write_aggregate_csv: no finals");
  std::ofstream os(file);
  if (!os) throw std::runtime_error("write_aggregate_csv: cannot open " + file.string());
  os << "metric,mean,std,n_seeds\n";
  for (const auto& view : metric_views(finals)) {
    const auto [mean, sd] = mean_std(view.values);
    os << view.name << ',' << format_double(mean) << ',' << format_double(sd) << ','
       << finals.size() << "\n";
  }
}

std::vector<MetricDelta> compare_finals(const std::vector<SeedFinal>& a,
                                        const std::vector<SeedFinal>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("compare_finals: empty report");
  const auto va = metric_views(a);
  const auto vb = metric_views(b);
  if (va.size() != vb.size())
    throw std::runtime_error("compare_finals: metric schema mismatch");
  std::vector<MetricDelta> out;
  for (std::size_t m = 0; m < va.size(); ++m) {
    if (va[m].name != vb[m].name)
      throw std::runtime_error("compare_finals: metric schema mismatch");
    MetricDelta d;
    d.metric = va[m].name;
    d.lower_is_better = va[m].lower_is_better;
    d.mean_a = mean_std(va[m].values).first;
    d.mean_b = mean_std(vb[m].values).first;
    d.delta = d.mean_b - d.mean_a;
    d.pairs = static_cast<int>(std::min(va[m].values.size(), vb[m].values.size()));
    for (int i = 0; i < d.pairs; ++i) {
      const bool win = d.lower_is_better ? vb[m].values[i] < va[m].values[i]
                                         : vb[m].values[i] > va[m].values[i];
      if (win) ++d.wins_b;
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace prefixgan
