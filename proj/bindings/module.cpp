#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "prefixgan/runner.hpp"

namespace py = pybind11;
using namespace prefixgan;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Prefix-evaluated adversarial sequence training (C++ core)";

  // ---- corpus ---------------------------------------------------------------
  py::class_<Vocab>(m, "Vocab")
      .def_readonly("tokens", &Vocab::tokens)
      .def_readonly("pad_id", &Vocab::pad_id)
      .def_readonly("start_id", &Vocab::start_id)
      .def("size", &Vocab::size)
      .def("id_of", &Vocab::id_of)
      .def("token_of", &Vocab::token_of)
      .def_static("build", &Vocab::build, py::arg("lines"))
      .def_static("synthetic", &Vocab::synthetic, py::arg("content_count"))
      .def("save", &Vocab::save)
      .def_static("load", &Vocab::load);

  py::class_<Sequence>(m, "Sequence")
      .def(py::init([](std::vector<int> ids, int true_len) {
             Sequence s;
             s.ids = std::move(ids);
             s.true_len = true_len;
             return s;
           }),
           py::arg("ids"), py::arg("true_len"))
      .def_readwrite("ids", &Sequence::ids)
      .def_readwrite("true_len", &Sequence::true_len)
      .def("max_len", &Sequence::max_len);

  py::class_<Corpus>(m, "Corpus")
      .def(py::init<>())
      .def_readwrite("sequences", &Corpus::sequences)
      .def_readwrite("T", &Corpus::T)
      .def_readwrite("t_ave", &Corpus::t_ave)
      .def("size", &Corpus::size);

  py::class_<SegmentPlan>(m, "SegmentPlan")
      .def(py::init<int, int>(), py::arg("t_mid"), py::arg("t_full"))
      .def_readwrite("t_mid", &SegmentPlan::t_mid)
      .def_readwrite("t_full", &SegmentPlan::t_full);

  m.def("tokenize", &tokenize);
  m.def("encode_corpus", &encode_corpus, py::arg("lines"), py::arg("vocab"), py::arg("t_max"));
  m.def("segment_plan", &segment_plan);
  m.def("decode", &decode);
  m.def("read_lines", &read_lines);
  m.def("write_lines", &write_lines);

  // ---- rng ------------------------------------------------------------------
  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", &Rng::uniform)
      .def("normal", &Rng::normal)
      .def("gumbel", &Rng::gumbel)
      .def("uniform_int", &Rng::uniform_int)
      .def("state", &Rng::state)
      .def("set_state", &Rng::set_state);

  // ---- oracle ---------------------------------------------------------------
  py::class_<NllEstimate>(m, "NllEstimate")
      .def_readonly("mean", &NllEstimate::mean)
      .def_readonly("std_err", &NllEstimate::std_err)
      .def_readonly("n", &NllEstimate::n);

  py::class_<OracleModel>(m, "OracleModel")
      .def_property_readonly("seed", [](const OracleModel& o) { return o.seed; })
      .def("vocab_size", &OracleModel::vocab_size)
      .def("hidden_width", &OracleModel::hidden_width)
      .def("save", &OracleModel::save)
      .def_static("load", &OracleModel::load);

  m.def("init_oracle", &init_oracle, py::arg("seed"), py::arg("vocab_size"),
        py::arg("hidden_width"));
  m.def("oracle_sample", &oracle_sample, py::arg("oracle"), py::arg("n"), py::arg("t_len"),
        py::arg("rng"));
  m.def("nll_oracle", &nll_oracle, py::arg("oracle"), py::arg("sampler"),
        py::arg("n_samples"), py::arg("t_len"), py::arg("rng"));
  m.def("nll_oracle_of", &nll_oracle_of, py::arg("oracle"), py::arg("sequences"));

  // ---- generator ------------------------------------------------------------
  py::class_<GeneratorModel>(m, "GeneratorModel")
      .def_readonly("start_id", &GeneratorModel::start_id)
      .def_property_readonly("vocab_size",
                             [](const GeneratorModel& g) { return g.lm.vocab; })
      .def_property_readonly("hidden_width",
                             [](const GeneratorModel& g) { return g.lm.hidden; })
      .def("save", &GeneratorModel::save)
      .def_static("load", &GeneratorModel::load);

  m.def("init_generator", &init_generator, py::arg("seed"), py::arg("vocab_size"),
        py::arg("hidden_width"), py::arg("start_id"), py::arg("init_std") = 0.1);
  m.def(
      "step_distribution",
      [](const GeneratorModel& g, const std::vector<int>& prefix) {
        return Vec(step_distribution(g, prefix));
      },
      py::arg("generator"), py::arg("prefix"));
  m.def("sample", &sample, py::arg("generator"), py::arg("n"), py::arg("t_len"),
        py::arg("rng"));
  m.def("sample_with_logprob", &sample_with_logprob, py::arg("generator"), py::arg("n"),
        py::arg("t_len"), py::arg("rng"));
  m.def("nll_gen", &nll_gen, py::arg("generator"), py::arg("corpus"));
  m.def(
      "mle_pretrain",
      [](GeneratorModel& g, const Corpus& c, int epochs, double lr, Rng& rng, int batch) {
        return mle_pretrain(g, c, epochs, lr, rng, batch).loss_curve;
      },
      py::arg("generator"), py::arg("corpus"), py::arg("epochs"), py::arg("lr"),
      py::arg("rng"), py::arg("batch_size") = 64);

  // ---- discriminator ----------------------------------------------------------
  py::enum_<DiscOutput>(m, "DiscOutput")
      .value("probability", DiscOutput::probability)
      .value("logit", DiscOutput::logit);

  py::class_<PrefixScore>(m, "PrefixScore")
      .def_readonly("t", &PrefixScore::t)
      .def_readonly("scores", &PrefixScore::scores);

  py::class_<SoftSequence>(m, "SoftSequence")
      .def(py::init([](std::vector<Vec> steps, double tau) {
             SoftSequence s;
             s.steps = std::move(steps);
             s.tau = tau;
             return s;
           }),
           py::arg("steps"), py::arg("tau") = 1.0)
      .def_readwrite("steps", &SoftSequence::steps)
      .def_readwrite("tau", &SoftSequence::tau)
      .def("size", &SoftSequence::size);

  py::class_<DiscriminatorModel>(m, "DiscriminatorModel")
      .def_readonly("vocab", &DiscriminatorModel::vocab)
      .def_readonly("t_len", &DiscriminatorModel::t_len)
      .def_readonly("heads", &DiscriminatorModel::heads)
      .def_readonly("pad_id", &DiscriminatorModel::pad_id)
      .def_readonly("output_mode", &DiscriminatorModel::output_mode)
      .def_readonly("score_count", &DiscriminatorModel::score_count)
      .def("save", &DiscriminatorModel::save)
      .def_static("load", &DiscriminatorModel::load);

  m.def("init_discriminator", &init_discriminator, py::arg("seed"), py::arg("vocab_size"),
        py::arg("t_len"), py::arg("emb_dim"), py::arg("n_filters"), py::arg("filter_sizes"),
        py::arg("heads"), py::arg("pad_id"), py::arg("mode"), py::arg("init_std") = 0.1);
  m.def("score_prefix", &score_prefix, py::arg("disc"), py::arg("sequence"), py::arg("t"));
  m.def("score_soft", &score_soft, py::arg("disc"), py::arg("soft"), py::arg("t"));
  m.def("score_batch", &score_batch, py::arg("disc"), py::arg("batch"), py::arg("t"));
  m.def(
      "disc_update_seqgan",
      [](DiscriminatorModel& d, const std::vector<Sequence>& real,
         const std::vector<Sequence>& fake, const std::string& variant,
         const SegmentPlan& plan, double lr) {
        RewardVariant v = variant == "baseline"      ? RewardVariant::baseline
                          : variant == "full_prefix" ? RewardVariant::full_prefix
                                                     : RewardVariant::two_segment;
        return disc_update(d, real, fake, make_seqgan_loss_builder(v, plan), lr);
      },
      py::arg("disc"), py::arg("real"), py::arg("fake"), py::arg("variant"),
      py::arg("plan"), py::arg("lr"));

  // ---- policy-gradient path ---------------------------------------------------
  py::enum_<RewardVariant>(m, "RewardVariant")
      .value("baseline", RewardVariant::baseline)
      .value("full_prefix", RewardVariant::full_prefix)
      .value("two_segment", RewardVariant::two_segment);

  py::class_<RewardMatrix>(m, "RewardMatrix")
      .def_readonly("values", &RewardMatrix::values)
      .def_readonly("variant", &RewardMatrix::variant);

  py::class_<RolloutPolicy>(m, "RolloutPolicy");
  m.def("make_rollout_policy", &make_rollout_policy);
  m.def("rollout", &rollout, py::arg("policy"), py::arg("prefix"), py::arg("target_len"),
        py::arg("n_rollouts"), py::arg("rng"));
  m.def("rewards_baseline", &rewards_baseline, py::arg("disc"), py::arg("generator"),
        py::arg("batch"), py::arg("n_rollouts"), py::arg("rng"));
  m.def("rewards_full_prefix", &rewards_full_prefix, py::arg("disc"), py::arg("batch"));
  m.def("rewards_two_segment", &rewards_two_segment, py::arg("disc"), py::arg("generator"),
        py::arg("batch"), py::arg("plan"), py::arg("n_rollouts"), py::arg("rng"));
  m.def("pg_update", &pg_update, py::arg("generator"), py::arg("batch"), py::arg("rewards"),
        py::arg("lr"));
  m.def("disc_loss_seqgan", &disc_loss_seqgan);
  m.def("disc_loss_full_prefix", &disc_loss_full_prefix);
  m.def("disc_loss_two_segment", &disc_loss_two_segment);

  // ---- relaxed path -------------------------------------------------------------
  m.def("gumbel_softmax_step", &gumbel_softmax_step, py::arg("logits"), py::arg("tau"),
        py::arg("rng"));
  m.def("relaxed_sample", &relaxed_sample, py::arg("generator"), py::arg("t_len"),
        py::arg("tau"), py::arg("rng"));
  m.def("relgan_d_loss", &relgan_d_loss, py::arg("disc"), py::arg("real"),
        py::arg("soft_fake"), py::arg("cuts"));
  m.def("relgan_g_loss", &relgan_g_loss, py::arg("disc"), py::arg("real"),
        py::arg("soft_fake"), py::arg("cuts"));
  m.def("relgan_cuts", &relgan_cuts, py::arg("variant"), py::arg("plan"), py::arg("t_len"));

  py::class_<TemperatureSchedule> sched(m, "TemperatureSchedule");
  py::enum_<TemperatureSchedule::Shape>(sched, "Shape")
      .value("constant", TemperatureSchedule::Shape::constant)
      .value("exponential", TemperatureSchedule::Shape::exponential);
  sched
      .def(py::init([](double target, int warmup, TemperatureSchedule::Shape shape) {
             TemperatureSchedule s;
             s.target = target;
             s.warmup_iters = warmup;
             s.shape = shape;
             return s;
           }),
           py::arg("target"), py::arg("warmup_iters"),
           py::arg("shape") = TemperatureSchedule::Shape::exponential)
      .def("at", &TemperatureSchedule::at);

  // ---- metrics --------------------------------------------------------------
  py::class_<BleuReport>(m, "BleuReport")
      .def_readonly("max_n", &BleuReport::max_n)
      .def_readonly("scores", &BleuReport::scores)
      .def_readonly("n_hypotheses", &BleuReport::n_hypotheses)
      .def_readonly("n_references", &BleuReport::n_references);

  py::class_<MetricRecord>(m, "MetricRecord")
      .def_readonly("bleu2", &MetricRecord::bleu2)
      .def_readonly("bleu3", &MetricRecord::bleu3)
      .def_readonly("bleu4", &MetricRecord::bleu4)
      .def_readonly("bleu5", &MetricRecord::bleu5)
      .def_readonly("nll_gen", &MetricRecord::nll_gen)
      .def_readonly("nll_oracle", &MetricRecord::nll_oracle)
      .def_readonly("n_samples", &MetricRecord::n_samples)
      .def_readonly("convention_id", &MetricRecord::convention_id);

  m.def("bleu", &bleu, py::arg("hypotheses"), py::arg("references"), py::arg("max_n") = 5);
  m.def(
      "evaluate_checkpoint",
      [](const GeneratorModel& gen, const Corpus& test, const Vocab& vocab, Rng& rng,
         const OracleModel* oracle, int offset, int n_samples) {
        return evaluate_checkpoint(gen, test, vocab, oracle, offset, n_samples, rng);
      },
      py::arg("generator"), py::arg("test"), py::arg("vocab"), py::arg("rng"),
      py::arg("oracle") = nullptr, py::arg("oracle_id_offset") = 0,
      py::arg("n_gen_samples") = 200);

  // ---- experiment runner ------------------------------------------------------
  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("mode", &TrainConfig::mode)
      .def_readwrite("algorithm", &TrainConfig::algorithm)
      .def_readwrite("variant", &TrainConfig::variant)
      .def_readwrite("train_path", &TrainConfig::train_path)
      .def_readwrite("test_path", &TrainConfig::test_path)
      .def_readwrite("out_dir", &TrainConfig::out_dir)
      .def_readwrite("seeds", &TrainConfig::seeds)
      .def_readwrite("T", &TrainConfig::t_max)
      .def_readwrite("vocab_cap", &TrainConfig::vocab_cap)
      .def_readwrite("oracle_seed", &TrainConfig::oracle_seed)
      .def_readwrite("oracle_hidden", &TrainConfig::oracle_hidden)
      .def_readwrite("gen_hidden", &TrainConfig::gen_hidden)
      .def_readwrite("disc_emb", &TrainConfig::disc_emb)
      .def_readwrite("disc_filters", &TrainConfig::disc_filters)
      .def_readwrite("disc_filter_sizes", &TrainConfig::disc_filter_sizes)
      .def_readwrite("disc_heads", &TrainConfig::disc_heads)
      .def_readwrite("n_train_synthetic", &TrainConfig::n_train_synthetic)
      .def_readwrite("n_test_synthetic", &TrainConfig::n_test_synthetic)
      .def_readwrite("n_eval_samples", &TrainConfig::n_eval_samples)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("pretrain_epochs", &TrainConfig::pretrain_epochs)
      .def_readwrite("adv_epochs", &TrainConfig::adv_epochs)
      .def_readwrite("g_steps", &TrainConfig::g_steps)
      .def_readwrite("d_steps", &TrainConfig::d_steps)
      .def_readwrite("rollout_n", &TrainConfig::rollout_n)
      .def_readwrite("lr_pretrain", &TrainConfig::lr_pretrain)
      .def_readwrite("lr_g", &TrainConfig::lr_g)
      .def_readwrite("lr_d", &TrainConfig::lr_d)
      .def_readwrite("tau_target", &TrainConfig::tau_target)
      .def_readwrite("tau_warmup", &TrainConfig::tau_warmup)
      .def_readwrite("tau_shape", &TrainConfig::tau_shape)
      .def_readwrite("mean_baseline", &TrainConfig::mean_baseline)
      .def_readwrite("cuts_override", &TrainConfig::cuts_override)
      .def_readwrite("wall_clock", &TrainConfig::wall_clock);

  m.def("load_config", &load_config, py::arg("file"),
        py::arg("overrides") = std::vector<std::string>{});
  m.def("validate_config", &validate_config);
  m.def("config_to_text", &config_to_text);
  m.def(
      "run_experiment",
      [](const TrainConfig& cfg) { return run_experiment(cfg); },
      py::arg("config"));
  m.def("compare_runs", &compare_runs, py::arg("dir_a"), py::arg("dir_b"));
  m.def("eval_generator_file", &eval_generator_file, py::arg("generator_blob"),
        py::arg("vocab_file"), py::arg("test_file"), py::arg("n_samples"), py::arg("seed"));

  m.attr("__all__") = py::make_tuple(
      "Vocab", "Sequence", "Corpus", "SegmentPlan", "tokenize", "encode_corpus",
      "segment_plan", "decode", "read_lines", "write_lines", "Rng", "NllEstimate",
      "OracleModel", "init_oracle", "oracle_sample", "nll_oracle", "nll_oracle_of",
      "GeneratorModel", "init_generator", "step_distribution", "sample",
      "sample_with_logprob", "nll_gen", "mle_pretrain", "DiscOutput", "PrefixScore",
      "SoftSequence", "DiscriminatorModel", "init_discriminator", "score_prefix",
      "score_soft", "score_batch", "disc_update_seqgan", "RewardVariant", "RewardMatrix",
      "RolloutPolicy", "make_rollout_policy", "rollout", "rewards_baseline",
      "rewards_full_prefix", "rewards_two_segment", "pg_update", "disc_loss_seqgan",
      "disc_loss_full_prefix", "disc_loss_two_segment", "gumbel_softmax_step",
      "relaxed_sample", "relgan_d_loss", "relgan_g_loss", "relgan_cuts",
      "TemperatureSchedule", "BleuReport", "MetricRecord", "bleu", "evaluate_checkpoint",
      "TrainConfig", "load_config", "validate_config", "config_to_text", "run_experiment",
      "compare_runs", "eval_generator_file");
}
