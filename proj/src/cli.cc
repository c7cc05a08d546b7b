#include "fnmt/cli.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "fnmt/bleu.h"
#include "fnmt/dataset.h"
#include "fnmt/decode_pipeline.h"
#include "fnmt/error.h"
#include "fnmt/factored_corpus.h"
#include "fnmt/filter.h"
#include "fnmt/model_io.h"
#include "fnmt/osm.h"
#include "fnmt/stats.h"
#include "fnmt/trainer.h"

namespace fnmt::cli {

namespace {

using Lines = std::vector<std::string>;

const std::vector<std::string> kCodecs = {"casing", "segmentation"};
const std::vector<std::string> kApplications = {"casing", "segmentation", "osnmt", "none"};

void check_parallel(const Lines& a, const Lines& b, const std::string& what) {
  if (a.size() != b.size())
    throw FormatError(what + ": " + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " lines");
}

// (lemma line, pop-count line)
std::pair<std::string, std::string> format_factored(const std::vector<osm::FactoredOp>& pairs) {
  Tokens lemmas, counts;
  for (const auto& p : pairs) {
    lemmas.push_back(p.lemma);
    counts.push_back(std::to_string(p.factor.n));
  }
  return {join_tokens(lemmas), join_tokens(counts)};
}

int parse_count(const std::string& tok) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size() || tok.empty()) throw FormatError("\"" + tok + "\" is not a pop count");
  return v;
}

struct Options {
  std::uint64_t seed = 1;

  std::string codec, in, out, out_lemma, out_factor, in_lemma, in_factor;
  bool detokenize = false;

  std::string src, tgt, alignment, alignment_out, report, out_src, out_tgt, langid;
  std::vector<std::string> tests;
  int max_pops = osm::kDefaultMaxPops;
  FilterConfig filter;

  std::vector<std::string> inputs;
  std::size_t vocab_size = 8000;
  std::string application = "none";
  std::string decode_application = "auto";

  std::string valid_src, valid_tgt, model, log;
  std::size_t src_vocab_size = 8000, tgt_vocab_size = 8000;
  ModelConfig model_config;
  TrainConfig train;

  std::string input, output;
  std::size_t beam = search::kDefaultBeam, max_len = 100, nbest = 1;
  std::string hyp, ref;
};

void cmd_factorize(const Options& o, std::ostream& err) {
  const auto corpus = encode_corpus(read_lines(o.in), parse_codec(o.codec));
  write_lines(o.out_lemma, corpus.lemmas);
  write_lines(o.out_factor, corpus.factors);
  if (parse_codec(o.codec) == Codec::kCasing) {
    std::size_t lossy = 0;
    for (const auto& line : read_lines(o.in))
      for (const auto& t : split_tokens(line)) lossy += is_lossy_casing(t);
    if (lossy) err << "warning: " << lossy << " mixed-case tokens will not round-trip\n";
  }
}

void cmd_defactorize(const Options& o) {
  FactoredCorpus corpus{read_lines(o.in_lemma), read_lines(o.in_factor)};
  check_parallel(corpus.lemmas, corpus.factors, "lemma and factor files");
  const auto codec = parse_codec(o.codec);
  if (o.detokenize && codec != Codec::kSegmentation) throw InvalidInput("--detokenize applies to segmentation only");
  Lines out;
  if (o.detokenize) {
    for (std::size_t i = 0; i < corpus.lemmas.size(); ++i)
      out.push_back(detokenize_line(corpus.lemmas[i], corpus.factors[i], i + 1));
  } else {
    out = decode_corpus(corpus, codec);
  }
  write_lines(o.out, out);
}

std::vector<std::size_t> source_lengths(const std::string& path) {
  std::vector<std::size_t> out;
  for (const auto& line : read_lines(path)) out.push_back(split_tokens(line).size());
  return out;
}

void cmd_osm_generate(const Options& o) {
  const auto lens = source_lengths(o.src);
  const auto tgt = read_lines(o.tgt);
  const auto al = read_lines(o.alignment);
  check_parallel(tgt, al, "target and alignment files");
  if (lens.size() != tgt.size()) throw FormatError("source and target files differ in line count");
  Lines out;
  for (std::size_t i = 0; i < tgt.size(); ++i) {
    try {
      out.push_back(osm::format_program(osm::generate(split_tokens(tgt[i]), osm::parse_alignment(al[i]), lens[i])));
    } catch (const Error& e) {
      throw FormatError("line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  write_lines(o.out, out);
}

void cmd_osm_compile(const Options& o) {
  const auto ops = read_lines(o.in);
  const auto lens = source_lengths(o.src);
  if (lens.size() != ops.size()) throw FormatError("program and source files differ in line count");
  Lines targets, links;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    try {
      const auto c = osm::interpret(osm::parse_program(ops[i]), lens[i]);
      targets.push_back(join_tokens(c.target));
      links.push_back(osm::format_alignment(c.alignment));
    } catch (const Error& e) {
      throw FormatError("line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  write_lines(o.out, targets);
  if (!o.alignment_out.empty()) write_lines(o.alignment_out, links);
}

void cmd_osm_factor(const Options& o) {
  Lines lemmas, factors;
  const auto ops = read_lines(o.in);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    try {
      auto [l, f] = format_factored(osm::factor(osm::parse_program(ops[i]), o.max_pops));
      lemmas.push_back(std::move(l));
      factors.push_back(std::move(f));
    } catch (const Error& e) {
      throw FormatError("line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  write_lines(o.out_lemma, lemmas);
  write_lines(o.out_factor, factors);
}

void cmd_osm_defactor(const Options& o) {
  const auto lemmas = read_lines(o.in_lemma);
  const auto factors = read_lines(o.in_factor);
  check_parallel(lemmas, factors, "lemma and factor files");
  Lines out;
  for (std::size_t i = 0; i < lemmas.size(); ++i) {
    try {
      const auto l = split_tokens(lemmas[i]);
      const auto f = split_tokens(factors[i]);
      if (l.size() != f.size()) throw FormatError("token count mismatch");
      std::vector<osm::FactoredOp> pairs;
      for (std::size_t k = 0; k < l.size(); ++k) pairs.push_back({l[k], {parse_count(f[k])}});
      out.push_back(osm::format_program(osm::defactor(pairs, o.max_pops)));
    } catch (const Error& e) {
      throw FormatError("line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  write_lines(o.out, out);
}

void cmd_osm_filter(const Options& o, std::ostream& out) {
  Lines kept, report;
  const auto ops = read_lines(o.in);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const bool keep = longest_pop_run(ops[i]) <= o.filter.max_pop_run;
    if (keep) kept.push_back(ops[i]);
    report.push_back(std::to_string(i + 1) + (keep ? "\tkeep" : "\tpop-run"));
  }
  write_lines(o.out, kept);
  if (!o.report.empty()) write_lines(o.report, report);
  out << "kept " << kept.size() << " of " << ops.size() << '\n';
}

void cmd_filter(const Options& o, std::ostream& out, std::ostream& err) {
  FilterInputs inputs;
  for (const auto& t : o.tests)
    for (auto& line : read_lines(t)) inputs.test_sentences.push_back(std::move(line));
  if (!o.langid.empty()) inputs.langid = parse_langid_sidecar(read_lines(o.langid));
  const auto result = filter_corpus(read_lines(o.src), read_lines(o.tgt), o.filter, inputs);
  for (const auto& w : result.report.warnings) err << "warning: " << w << '\n';
  if (!o.report.empty()) write_lines(o.report, result.report.lines());
  if (!o.out_src.empty()) write_lines(o.out_src, result.src);
  if (!o.out_tgt.empty()) write_lines(o.out_tgt, result.tgt);
  out << "total\t" << result.report.total() << "\nkeep\t" << result.report.kept << '\n';
  for (const auto& [rule, n] : result.report.rejected) out << rule_name(rule) << '\t' << n << '\n';
}

void cmd_vocab(const Options& o) {
  Lines lines;
  for (const auto& path : o.inputs)
    for (auto& line : read_lines(path)) lines.push_back(std::move(line));
  const auto app = parse_application(o.application);
  if (app != Application::kNone) lines = target_lemma_lines(lines, app);
  Vocab::build(lines, o.vocab_size).save(o.out);
}

void cmd_train(const Options& o, std::ostream& out) {
  const auto app = parse_application(o.application);
  const auto src = read_lines(o.src);
  const auto tgt = read_lines(o.tgt);
  check_parallel(src, tgt, "training source and target");
  if (src.empty()) throw InvalidInput("empty training corpus");
  const auto source_vocab = Vocab::build(src, o.src_vocab_size);
  const auto target_vocab = Vocab::build(target_lemma_lines(tgt, app), o.tgt_vocab_size);
  const auto corpus = make_examples(src, tgt, app, source_vocab, target_vocab);
  std::vector<Example> valid;
  if (!o.valid_src.empty() || !o.valid_tgt.empty()) {
    if (o.valid_src.empty() || o.valid_tgt.empty()) throw InvalidInput("--valid-src and --valid-tgt go together");
    valid = make_examples(read_lines(o.valid_src), read_lines(o.valid_tgt), app, source_vocab, target_vocab);
  } else {
    valid = corpus;
  }

  ModelConfig config = o.model_config;
  config.source_vocab = source_vocab.size();
  config.target_vocab = target_vocab.size();
  config.factor_vocab = factor_vocab_size(app);
  config.seed = o.seed;
  TrainConfig tc = o.train;
  tc.seed = o.seed;

  std::vector<std::string> log;
  auto result = train(config, corpus, valid, tc, [&](const TrainLogEntry& e, const Model<float>&) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "step %zu loss %.6f valid_ppl %.6f lr %.8g%s", e.step, e.train_loss,
                  e.valid_perplexity, e.learning_rate, e.decayed ? " decayed" : "");
    out << buf << '\n';
    log.emplace_back(buf);
    return false;
  });
  save_model(o.model, ModelBundle{app, config, source_vocab, target_vocab, std::move(result.params)});
  if (!o.log.empty()) write_lines(o.log, log);
}

void cmd_decode(const Options& o, std::ostream& out, std::ostream& err) {
  auto bundle = load_model(o.model);
  if (o.decode_application != "auto" && parse_application(o.decode_application) != bundle.application)
    throw InvalidInput("model was trained for application " + std::string(application_name(bundle.application)));
  if (o.beam == 0) throw InvalidInput("--beam must be at least 1");
  if (o.nbest == 0) throw InvalidInput("--nbest must be at least 1");
  const bool osnmt = bundle.application == Application::kOsnmt;
  if (!o.alignment_out.empty() && !osnmt) throw InvalidInput("--alignment-out needs an osnmt model");
  const Decoder decoder(std::move(bundle));

  search::SearchConfig sc;
  sc.beam = std::max(o.beam, o.nbest);
  sc.max_len = o.max_len;
  Lines texts, links;
  const auto lines = read_lines(o.input);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::vector<DecodedSentence> results;
    try {
      results = decoder.decode(lines[i], sc, o.nbest);
    } catch (const Error& e) {
      throw InvalidInput("line " + std::to_string(i + 1) + ": " + e.what());
    }
    if (results.front().flagged) err << "line " << i + 1 << ": no well-formed hypothesis; ops stripped\n";
    if (o.nbest == 1) {
      texts.push_back(results.front().text);
    } else {
      for (const auto& r : results) {
        char score[40];
        std::snprintf(score, sizeof score, "%.6f", r.score);
        texts.push_back(std::to_string(i) + " ||| " + r.text + " ||| " + score);
      }
    }
    links.push_back(osm::format_alignment(results.front().alignment));
  }
  if (o.output.empty()) {
    for (const auto& t : texts) out << t << '\n';
  } else {
    write_lines(o.output, texts);
  }
  if (!o.alignment_out.empty()) write_lines(o.alignment_out, links);
}

void cmd_eval(const Options& o, std::ostream& out) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "BLEU %.2f", 100.0 * bleu(read_lines(o.hyp), read_lines(o.ref)));
  out << buf << '\n';
}

void cmd_stats(const Options& o, std::ostream& out) {
  const auto stats = corpus_stats(read_lines(o.in), parse_application(o.application), o.filter.max_pop_run);
  for (const auto& line : stats.report()) out << line << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Factored NMT toolkit: codecs, operation sequences, training, decoding and evaluation.", "fnmt"};
  app.set_config("--config", "", "TOML/INI file whose keys mirror the flags; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.add_option("--seed", o.seed, "Seed for all randomness")->capture_default_str();

  auto* factorize = app.add_subcommand("factorize", "Split a corpus into lemma and factor files");
  factorize->add_option("--codec", o.codec)->required()->check(CLI::IsMember(kCodecs));
  factorize->add_option("--in", o.in)->required();
  factorize->add_option("--out-lemma", o.out_lemma)->required();
  factorize->add_option("--out-factor", o.out_factor)->required();

  auto* defactorize = app.add_subcommand("defactorize", "Rebuild a corpus from lemma and factor files");
  defactorize->add_option("--codec", o.codec)->required()->check(CLI::IsMember(kCodecs));
  defactorize->add_option("--in-lemma", o.in_lemma)->required();
  defactorize->add_option("--in-factor", o.in_factor)->required();
  defactorize->add_option("--out", o.out)->required();
  defactorize->add_flag("--detokenize", o.detokenize, "Segmentation: write plain words instead of marked subwords");

  auto* osm_cmd = app.add_subcommand("osm", "Operation sequence tools");
  osm_cmd->require_subcommand(1);
  auto* generate = osm_cmd->add_subcommand("generate", "Target + alignment -> operation sequence");
  generate->add_option("--src", o.src, "Source sentences (for their lengths)")->required();
  generate->add_option("--tgt", o.tgt)->required();
  generate->add_option("--alignment", o.alignment, "Lines of s-t links")->required();
  generate->add_option("--out", o.out)->required();
  auto* compile = osm_cmd->add_subcommand("compile", "Operation sequence -> target + alignment");
  compile->add_option("--in", o.in)->required();
  compile->add_option("--src", o.src, "Source sentences (for their lengths)")->required();
  compile->add_option("--out", o.out)->required();
  compile->add_option("--alignment-out", o.alignment_out);
  auto* factor_cmd = osm_cmd->add_subcommand("factor", "Replace SRC_POP runs by counts");
  factor_cmd->add_option("--in", o.in)->required();
  factor_cmd->add_option("--out-lemma", o.out_lemma)->required();
  factor_cmd->add_option("--out-factor", o.out_factor)->required();
  factor_cmd->add_option("--max-pops", o.max_pops)->capture_default_str();
  auto* defactor_cmd = osm_cmd->add_subcommand("defactor", "Expand pop counts back into SRC_POP runs");
  defactor_cmd->add_option("--in-lemma", o.in_lemma)->required();
  defactor_cmd->add_option("--in-factor", o.in_factor)->required();
  defactor_cmd->add_option("--out", o.out)->required();
  defactor_cmd->add_option("--max-pops", o.max_pops)->capture_default_str();
  auto* osm_filter = osm_cmd->add_subcommand("filter", "Drop programs with long SRC_POP runs");
  osm_filter->add_option("--in", o.in)->required();
  osm_filter->add_option("--out", o.out)->required();
  osm_filter->add_option("--max-pop-run", o.filter.max_pop_run)->capture_default_str();
  osm_filter->add_option("--report", o.report);

  auto* filter = app.add_subcommand("filter", "Apply the corpus filtering rules to a parallel corpus");
  filter->add_option("--src", o.src)->required();
  filter->add_option("--tgt", o.tgt)->required();
  filter->add_option("--test", o.tests, "Test sets for the n-gram overlap rule");
  filter->add_option("--min-chars", o.filter.min_chars)->capture_default_str();
  filter->add_option("--max-words", o.filter.max_words)->capture_default_str();
  filter->add_option("--max-ratio", o.filter.max_ratio)->capture_default_str();
  filter->add_option("--ngram", o.filter.ngram)->capture_default_str();
  filter->add_option("--max-pop-run", o.filter.max_pop_run)->capture_default_str();
  filter->add_option("--langid-sidecar", o.langid, "Per-line 1/0 keep flags");
  filter->add_option("--report", o.report, "lineno<TAB>rule lines");
  filter->add_option("--out-src", o.out_src);
  filter->add_option("--out-tgt", o.out_tgt);

  auto* vocab = app.add_subcommand("vocab", "Build a vocabulary file");
  vocab->add_option("--in", o.inputs)->required();
  vocab->add_option("--size", o.vocab_size, "Entries including the 4 reserved ids")->capture_default_str();
  vocab->add_option("--application", o.application, "Build over first-factor tokens of this target format")
      ->check(CLI::IsMember(kApplications))
      ->capture_default_str();
  vocab->add_option("--out", o.out)->required();

  auto* train_cmd = app.add_subcommand("train", "Train a factored model");
  train_cmd->add_option("--application", o.application)->required()->check(CLI::IsMember(kApplications));
  train_cmd->add_option("--src", o.src)->required();
  train_cmd->add_option("--tgt", o.tgt)->required();
  train_cmd->add_option("--valid-src", o.valid_src);
  train_cmd->add_option("--valid-tgt", o.valid_tgt);
  train_cmd->add_option("--model", o.model, "Output model directory")->required();
  train_cmd->add_option("--src-vocab-size", o.src_vocab_size)->capture_default_str();
  train_cmd->add_option("--tgt-vocab-size", o.tgt_vocab_size)->capture_default_str();
  train_cmd->add_option("--embedding-dim", o.model_config.embedding_dim)->capture_default_str();
  train_cmd->add_option("--hidden-dim", o.model_config.hidden_dim)->capture_default_str();
  train_cmd->add_option("--layers", o.model_config.encoder_layers)->capture_default_str();
  train_cmd->add_option("--label-smoothing", o.model_config.label_smoothing)->capture_default_str();
  train_cmd->add_option("--dropout", o.model_config.dropout)->capture_default_str();
  train_cmd->add_flag("--coverage", o.model_config.coverage);
  train_cmd->add_option("--steps", o.train.max_steps)->capture_default_str();
  train_cmd->add_option("--batch-size", o.train.batch_size)->capture_default_str();
  train_cmd->add_option("--validate-every", o.train.validate_every)->capture_default_str();
  train_cmd->add_option("--learning-rate", o.train.learning_rate)->capture_default_str();
  train_cmd->add_option("--decay-factor", o.train.decay_factor)->capture_default_str();
  train_cmd->add_option("--log", o.log);

  auto* decode = app.add_subcommand("decode", "Translate with a trained model");
  decode->add_option("--model", o.model)->required();
  decode->add_option("--input", o.input)->required();
  decode->add_option("--output", o.output, "Defaults to standard output");
  decode->add_option("--beam", o.beam)->capture_default_str();
  decode->add_option("--max-len", o.max_len)->capture_default_str();
  decode->add_option("--application", o.decode_application, "Must match the model; auto accepts any")
      ->check(CLI::IsMember({"casing", "segmentation", "osnmt", "none", "auto"}))
      ->capture_default_str();
  decode->add_option("--nbest", o.nbest, "K > 1 writes 'id ||| text ||| score' lines")->capture_default_str();
  decode->add_option("--alignment-out", o.alignment_out);

  auto* eval = app.add_subcommand("eval", "Corpus BLEU of hypotheses against references");
  eval->add_option("--hyp", o.hyp)->required();
  eval->add_option("--ref", o.ref)->required();

  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  stats->add_option("--in", o.in)->required();
  stats->add_option("--application", o.application)->check(CLI::IsMember(kApplications))->capture_default_str();
  stats->add_option("--max-pop-run", o.filter.max_pop_run)->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::FileError& e) {
    app.exit(e, out, err);
    return kExitIo;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInvalid;
  }

  try {
    if (factorize->parsed()) cmd_factorize(o, err);
    else if (defactorize->parsed()) cmd_defactorize(o);
    else if (generate->parsed()) cmd_osm_generate(o);
    else if (compile->parsed()) cmd_osm_compile(o);
    else if (factor_cmd->parsed()) cmd_osm_factor(o);
    else if (defactor_cmd->parsed()) cmd_osm_defactor(o);
    else if (osm_filter->parsed()) cmd_osm_filter(o, out);
    else if (filter->parsed()) cmd_filter(o, out, err);
    else if (vocab->parsed()) cmd_vocab(o);
    else if (train_cmd->parsed()) cmd_train(o, out);
    else if (decode->parsed()) cmd_decode(o, out, err);
    else if (eval->parsed()) cmd_eval(o, out);
    else if (stats->parsed()) cmd_stats(o, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitOk;
}

}  // namespace fnmt::cli
