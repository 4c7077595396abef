#include "prefixgan/runner.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>

#include "prefixgan/plot.hpp"

namespace prefixgan {

namespace {

constexpr std::uint64_t kEvalSalt = 0x9e3779b97f4a7c15ull;
constexpr std::uint64_t kDataSalt = 0xc2b2ae3d27d4eb4full;

Corpus shift_ids(const Corpus& c, int offset) {
  Corpus out = c;
  for (auto& s : out.sequences)
    for (int& id : s.ids) id += offset;
  return out;
}

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

PipelineData prepare_data(const TrainConfig& cfg) {
  PipelineData data;
  if (cfg.mode == "synthetic") {
    data.vocab = Vocab::synthetic(cfg.vocab_cap);
    data.oracle = init_oracle(cfg.oracle_seed, cfg.vocab_cap, cfg.oracle_hidden);
    data.oracle_offset = 2;  // pad, start
    Rng data_rng(cfg.oracle_seed ^ kDataSalt);
    const Corpus train_raw = oracle_sample(*data.oracle, cfg.n_train_synthetic, cfg.t_max, data_rng);
    const Corpus test_raw = oracle_sample(*data.oracle, cfg.n_test_synthetic, cfg.t_max, data_rng);
    data.train = shift_ids(train_raw, data.oracle_offset);
    data.test = shift_ids(test_raw, data.oracle_offset);
  } else {
    const auto train_lines = read_lines(cfg.train_path);
    const auto test_lines = read_lines(cfg.test_path);
    // Vocabulary over train plus test so held-out scoring has no unknowns,
    // matching how the benchmark corpora are distributed.
    std::vector<std::string> all_lines = train_lines;
    all_lines.insert(all_lines.end(), test_lines.begin(), test_lines.end());
    data.vocab = Vocab::build(all_lines);
    data.train = encode_corpus(train_lines, data.vocab, cfg.t_max);
    data.test = encode_corpus(test_lines, data.vocab, cfg.t_max);
    data.oracle_offset = 0;
  }
  if (!cfg.cuts_override.empty())
    data.plan = SegmentPlan{cfg.cuts_override[0], cfg.cuts_override[1]};
  else
    data.plan = segment_plan(data.train);
  return data;
}

std::optional<double> eval_nll_oracle(const PipelineData& data, const GeneratorModel& gen,
                                      int n_samples, Rng& eval_rng) {
  if (!data.oracle) return std::nullopt;
  auto samples = sample(gen, n_samples, data.train.T, eval_rng);
  for (auto& s : samples)
    for (int& id : s.ids) id -= data.oracle_offset;
  return nll_oracle_of(*data.oracle, samples).mean;
}

namespace {

EpochRow make_row(const TrainConfig& cfg, const PipelineData& data, const GeneratorModel& gen,
                  Rng& eval_rng, int epoch, const char* phase, double d_loss, double g_obj,
                  double wall) {
  EpochRow row;
  row.epoch = epoch;
  row.phase = phase;
  row.nll_oracle = eval_nll_oracle(data, gen, cfg.n_eval_samples, eval_rng);
  row.nll_gen = nll_gen(gen, data.test);
  row.d_loss = d_loss;
  row.g_objective = g_obj;
  row.wall_s = cfg.wall_clock ? wall : 0.0;
  return row;
}

void snapshot(ModelSnapshot* out, const GeneratorModel& gen, const DiscriminatorModel& disc,
              const Rng& rng) {
  if (!out) return;
  out->gen = gen;
  out->disc = disc;
  out->rng_state = rng.state();
}

template <typename EpochFn>
void run_schedule(const TrainConfig& cfg, const PipelineData& data, GeneratorModel& gen,
                  DiscriminatorModel& disc, Rng& train_rng, Rng& eval_rng, RunSeries& out,
                  std::vector<double>* pretrain_curve, ModelSnapshot* last_good,
                  EpochFn adv_epoch) {
  snapshot(last_good, gen, disc, train_rng);
  int epoch = 0;
  for (int e = 0; e < cfg.pretrain_epochs; ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = mle_pretrain(gen, data.train, 1, cfg.lr_pretrain, train_rng, cfg.batch_size);
    if (pretrain_curve) pretrain_curve->push_back(res.loss_curve.at(0));
    out.rows.push_back(make_row(cfg, data, gen, eval_rng, ++epoch, "pretrain", 0.0, 0.0,
                                elapsed_s(t0)));
    snapshot(last_good, gen, disc, train_rng);
  }
  for (int e = 0; e < cfg.adv_epochs; ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochRow row = adv_epoch(e, t0);
    row.epoch = ++epoch;
    out.rows.push_back(std::move(row));
    snapshot(last_good, gen, disc, train_rng);
  }
}

RewardVariant parse_variant(const std::string& v) {
  if (v == "baseline") return RewardVariant::baseline;
  if (v == "full_prefix") return RewardVariant::full_prefix;
  return RewardVariant::two_segment;
}

}  // namespace

void train_seqgan(const TrainConfig& cfg, const PipelineData& data, GeneratorModel& gen,
                  DiscriminatorModel& disc, Rng& train_rng, Rng& eval_rng, RunSeries& out,
                  std::vector<double>* pretrain_curve, ModelSnapshot* last_good) {
  AdversarialSettings s;
  s.variant = parse_variant(cfg.variant);
  s.plan = data.plan;
  s.epochs = cfg.adv_epochs;
  s.g_steps = cfg.g_steps;
  s.d_steps = cfg.d_steps;
  s.batch_size = cfg.batch_size;
  s.n_rollouts = cfg.rollout_n;
  s.lr_g = cfg.lr_g;
  s.lr_d = cfg.lr_d;
  s.mean_baseline = cfg.mean_baseline;
  out.has_tau = false;
  run_schedule(cfg, data, gen, disc, train_rng, eval_rng, out, pretrain_curve, last_good,
               [&](int, const std::chrono::steady_clock::time_point& t0) {
                 const auto [d_loss, g_obj] =
                     seqgan_adversarial_epoch(gen, disc, data.train, s, train_rng);
                 return make_row(cfg, data, gen, eval_rng, 0, "adversarial", d_loss, g_obj,
                                 elapsed_s(t0));
               });
}

void train_relgan(const TrainConfig& cfg, const PipelineData& data, GeneratorModel& gen,
                  DiscriminatorModel& disc, Rng& train_rng, Rng& eval_rng, RunSeries& out,
                  std::vector<double>* pretrain_curve, ModelSnapshot* last_good) {
  RelganSettings s;
  s.variant = parse_variant(cfg.variant);
  s.plan = data.plan;
  s.epochs = cfg.adv_epochs;
  s.g_steps = cfg.g_steps;
  s.d_steps = cfg.d_steps;
  s.batch_size = cfg.batch_size;
  s.lr_g = cfg.lr_g;
  s.lr_d = cfg.lr_d;
  TemperatureSchedule schedule;
  schedule.target = cfg.tau_target;
  schedule.warmup_iters = cfg.tau_warmup;
  schedule.shape = cfg.tau_shape == "constant" ? TemperatureSchedule::Shape::constant
                                               : TemperatureSchedule::Shape::exponential;
  out.has_tau = true;
  run_schedule(cfg, data, gen, disc, train_rng, eval_rng, out, pretrain_curve, last_good,
               [&](int e, const std::chrono::steady_clock::time_point& t0) {
                 const double tau = schedule.at(e);
                 const auto [d_loss, g_loss] =
                     relgan_adversarial_epoch(gen, disc, data.train, s, tau, train_rng);
                 EpochRow row = make_row(cfg, data, gen, eval_rng, 0, "adversarial", d_loss,
                                         -g_loss, elapsed_s(t0));
                 row.tau = tau;
                 return row;
               });
}

namespace {

void write_checkpoint_dir(const std::filesystem::path& dir, const TrainConfig& cfg,
                          const GeneratorModel& gen, const DiscriminatorModel& disc,
                          const std::string& rng_state) {
  std::filesystem::create_directories(dir);
  std::ofstream cfg_os(dir / "config.cfg");
  cfg_os << config_to_text(cfg);
  gen.save(dir / "generator.bin");
  disc.save(dir / "discriminator.bin");
  std::ofstream rng_os(dir / "rng_state.txt");
  rng_os << rng_state << "\n";
}

void write_corpus_text(const std::filesystem::path& file, const Corpus& corpus,
                       const Vocab& vocab) {
  std::vector<std::string> lines;
  lines.reserve(corpus.size());
  for (const auto& s : corpus.sequences) {
    const auto toks = decode(s, vocab);
    std::string line;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (i) line += ' ';
      line += toks[i];
    }
    lines.push_back(std::move(line));
  }
  write_lines(file, lines);
}

void write_pretrain_curve(const std::filesystem::path& file, const std::vector<double>& curve) {
  std::ofstream os(file);
  os << "epoch,loss\n";
  for (std::size_t i = 0; i < curve.size(); ++i)
    os << (i + 1) << ',' << format_double(curve[i]) << "\n";
}

}  // namespace

int run_experiment(const TrainConfig& cfg,
                   const std::optional<std::filesystem::path>& config_source) {
  validate_config(cfg);
  const std::filesystem::path out_dir = cfg.out_dir;
  std::filesystem::create_directories(out_dir);
  if (config_source)
    std::filesystem::copy_file(*config_source, out_dir / "config_source.cfg",
                               std::filesystem::copy_options::overwrite_existing);
  {
    std::ofstream os(out_dir / "config.cfg");
    os << config_to_text(cfg);
  }

  const PipelineData data = prepare_data(cfg);
  data.vocab.save(out_dir / "vocab.txt");
  if (data.oracle) {
    data.oracle->save(out_dir / "oracle.bin");
    write_corpus_text(out_dir / "train.txt", data.train, data.vocab);
    write_corpus_text(out_dir / "test.txt", data.test, data.vocab);
  }

  std::vector<SeedFinal> finals;
  std::vector<PlotSeries> gen_curves;
  std::vector<PlotSeries> oracle_curves;
  bool failed = false;

  for (const std::uint64_t seed : cfg.seeds) {
    const std::filesystem::path seed_dir = out_dir / ("seed_" + std::to_string(seed));
    std::filesystem::create_directories(seed_dir);
    Rng train_rng(seed);
    Rng eval_rng(seed ^ kEvalSalt);
    GeneratorModel gen = init_generator(train_rng.next_u64(), data.vocab.size(),
                                        cfg.gen_hidden, data.vocab.start_id);
    DiscriminatorModel disc = init_discriminator(
        train_rng.next_u64(), data.vocab.size(), cfg.t_max, cfg.disc_emb, cfg.disc_filters,
        cfg.disc_filter_sizes, cfg.resolved_heads(), data.vocab.pad_id,
        cfg.algorithm == "relgan" ? DiscOutput::logit : DiscOutput::probability);

    RunSeries series;
    std::vector<double> pretrain_curve;
    ModelSnapshot last_good;
    try {
      if (cfg.algorithm == "seqgan")
        train_seqgan(cfg, data, gen, disc, train_rng, eval_rng, series, &pretrain_curve,
                     &last_good);
      else
        train_relgan(cfg, data, gen, disc, train_rng, eval_rng, series, &pretrain_curve,
                     &last_good);
    } catch (const std::exception& e) {
      std::cerr << "seed " << seed << ": training aborted: " << e.what() << "\n";
      write_epochs_csv(seed_dir / "epochs.csv", series);
      write_pretrain_curve(seed_dir / "pretrain_loss.csv", pretrain_curve);
      write_checkpoint_dir(seed_dir / "checkpoint", cfg, last_good.gen, last_good.disc,
                           last_good.rng_state);
      failed = true;
      break;
    }

    write_epochs_csv(seed_dir / "epochs.csv", series);
    write_pretrain_curve(seed_dir / "pretrain_loss.csv", pretrain_curve);
    write_checkpoint_dir(seed_dir / "checkpoint", cfg, gen, disc, train_rng.state());

    const MetricRecord final_rec =
        evaluate_checkpoint(gen, data.test, data.vocab, data.oracle ? &*data.oracle : nullptr,
                            data.oracle_offset, cfg.n_eval_samples, eval_rng);
    write_final_csv(seed_dir / "final.csv", final_rec);
    finals.push_back(SeedFinal{seed, final_rec});

    PlotSeries gen_curve{"seed " + std::to_string(seed), {}};
    PlotSeries oracle_curve{"seed " + std::to_string(seed), {}};
    for (const auto& row : series.rows) {
      gen_curve.y.push_back(row.nll_gen);
      if (row.nll_oracle) oracle_curve.y.push_back(*row.nll_oracle);
    }
    gen_curves.push_back(std::move(gen_curve));
    if (!oracle_curve.y.empty()) oracle_curves.push_back(std::move(oracle_curve));
  }

  if (!gen_curves.empty())
    write_curves_png(out_dir / "nll_gen.png", "epoch", "nll_gen", gen_curves);
  if (!oracle_curves.empty())
    write_curves_png(out_dir / "nll_oracle.png", "epoch", "nll_oracle", oracle_curves);
  if (!finals.empty()) write_aggregate_csv(out_dir / "aggregate.csv", finals);
  return failed ? 2 : 0;
}

std::vector<SeedFinal> load_run_finals(const std::filesystem::path& run_dir) {
  std::vector<std::filesystem::path> seed_dirs;
  for (const auto& entry : std::filesystem::directory_iterator(run_dir)) {
    if (entry.is_directory() && entry.path().filename().string().rfind("seed_", 0) == 0)
      seed_dirs.push_back(entry.path());
  }
  std::sort(seed_dirs.begin(), seed_dirs.end());
  std::vector<SeedFinal> finals;
  for (const auto& dir : seed_dirs) {
    const auto file = dir / "final.csv";
    if (!std::filesystem::exists(file)) continue;
    SeedFinal f;
    const std::string name = dir.filename().string();
    f.seed = std::stoull(name.substr(5));
    f.record = read_final_csv(file);
    finals.push_back(std::move(f));
  }
  if (finals.empty())
    throw std::runtime_error("no per-seed finals found under " + run_dir.string());
  return finals;
}

int compare_runs(const std::filesystem::path& dir_a, const std::filesystem::path& dir_b) {
  const auto a = load_run_finals(dir_a);
  const auto b = load_run_finals(dir_b);
  const auto deltas = compare_finals(a, b);
  std::cout << "metric,mean_a,mean_b,delta,sign,wins_b,pairs\n";
  for (const auto& d : deltas) {
    const char* sign = d.delta > 0 ? "+" : (d.delta < 0 ? "-" : "0");
    std::cout << d.metric << ',' << format_double(d.mean_a) << ',' << format_double(d.mean_b)
              << ',' << format_double(d.delta) << ',' << sign << ',' << d.wins_b << ','
              << d.pairs << "\n";
  }
  return 0;
}

MetricRecord eval_generator_file(const std::filesystem::path& generator_blob,
                                 const std::filesystem::path& vocab_file,
                                 const std::filesystem::path& test_file, int n_samples,
                                 std::uint64_t seed) {
  GeneratorModel gen = GeneratorModel::load(generator_blob);
  const Vocab vocab = Vocab::load(vocab_file);
  if (vocab.size() != gen.lm.vocab)
    throw std::runtime_error("eval: vocab size does not match the generator blob");
  const auto lines = read_lines(test_file);
  // Longest line decides the grid when the blob's T is unknown; scoring only
  // needs a shared T across sequences.
  int t_max = 1;
  for (const auto& l : lines) t_max = std::max(t_max, static_cast<int>(tokenize(l).size()));
  const Corpus test = encode_corpus(lines, vocab, t_max);
  Rng rng(seed);
  return evaluate_checkpoint(gen, test, vocab, nullptr, 0, n_samples, rng);
}

}  // namespace prefixgan
