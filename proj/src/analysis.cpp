#include "hbpo/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "format.hpp"

namespace hbpo {

std::string EvalSetting::label() const {
  switch (kind) {
    case Kind::Natural:
      return "natural";
    case Kind::MinimalPrompt:
      return "minimal-prompt";
    case Kind::FixedBudget:
      return "fixed-budget-" + std::to_string(budget.tokens);
  }
  return "natural";
}

EvalReport evaluate(const PolicyParams& policy, const EnvConfig& env, const EvalSetting& setting,
                    int n_eval, std::uint64_t seed) {
  if (n_eval < 1) throw std::invalid_argument("evaluate: n_eval must be >= 1");
  const double feature = setting.budget_feature;

  EvalReport report;
  report.setting = setting.label();
  report.per_tier_accuracy.assign(static_cast<std::size_t>(env.tiers), 0.0);
  report.per_tier_mean_length.assign(static_cast<std::size_t>(env.tiers), 0.0);
  report.per_tier_count.assign(static_cast<std::size_t>(env.tiers), 0);

  RngState dataset_rng{seed, 0};
  const std::vector<Problem> problems = make_dataset(n_eval, env, dataset_rng);

  std::vector<double> len_sum(static_cast<std::size_t>(env.tiers), 0.0);
  std::vector<int> correct_sum(static_cast<std::size_t>(env.tiers), 0);
  double total_len = 0.0;
  int total_correct = 0;
  for (int i = 0; i < n_eval; ++i) {
    const Problem& p = problems[i];
    const Context ctx{p.tier, feature};
    RngState policy_rng{seed, static_cast<std::uint64_t>(n_eval) + 2ULL * i};
    const SampleResult draw = sample(ctx, policy, policy_rng);
    RngState outcome_rng{seed, static_cast<std::uint64_t>(n_eval) + 2ULL * i + 1};
    const bool correct = sample_outcome(draw.n_gen, p, env, outcome_rng);

    len_sum[p.tier - 1] += draw.n_gen;
    correct_sum[p.tier - 1] += correct ? 1 : 0;
    report.per_tier_count[p.tier - 1] += 1;
    total_len += draw.n_gen;
    total_correct += correct ? 1 : 0;
  }

  for (int d = 0; d < env.tiers; ++d) {
    if (report.per_tier_count[d] == 0) continue;
    report.per_tier_accuracy[d] =
        static_cast<double>(correct_sum[d]) / report.per_tier_count[d];
    report.per_tier_mean_length[d] = len_sum[d] / report.per_tier_count[d];
  }
  report.overall_accuracy = static_cast<double>(total_correct) / n_eval;
  report.overall_mean_tokens = total_len / n_eval;
  if (report.per_tier_count.front() > 0 && report.per_tier_count.back() > 0 &&
      report.per_tier_mean_length.front() > 0.0)
    report.adaptation_ratio =
        report.per_tier_mean_length.back() / report.per_tier_mean_length.front();
  return report;
}

const std::vector<std::string>& default_reflection_keywords() {
  static const std::vector<std::string> kKeywords = {"wait",     "alternatively", "but",
                                                     "remember", "check",         "verify"};
  return kKeywords;
}

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0 || c == '_'; }

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

int count_tokens(std::string_view s) {
  int count = 0;
  bool in_token = false;
  for (unsigned char c : s) {
    const bool ws = std::isspace(c) != 0;
    if (!ws && !in_token) ++count;
    in_token = !ws;
  }
  return count;
}

void count_keywords(std::string_view s, const std::vector<std::string>& lowered,
                    std::map<std::string, int>& counts, int* total) {
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_word_char(static_cast<unsigned char>(s[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && is_word_char(static_cast<unsigned char>(s[j]))) ++j;
    const std::string word = to_lower(s.substr(i, j - i));
    for (const std::string& kw : lowered) {
      if (word == kw) {
        ++counts[kw];
        if (total != nullptr) ++*total;
        break;
      }
    }
    i = j;
  }
}

}  // namespace

TranscriptStats analyze_transcript(std::string_view text,
                                   const std::vector<std::string>& keywords) {
  std::vector<std::string> lowered;
  lowered.reserve(keywords.size());
  for (const std::string& kw : keywords) lowered.push_back(to_lower(kw));

  TranscriptStats stats;
  for (const std::string& kw : lowered) stats.keyword_counts[kw] = 0;

  std::string_view thinking;
  std::string_view solution_head = text;  // before the open tag
  std::string_view solution_tail;         // after the close tag

  const std::size_t open = text.find(kThinkOpen);
  if (open != std::string_view::npos) {
    solution_head = text.substr(0, open);
    const std::size_t body = open + kThinkOpen.size();
    const std::size_t close = text.find(kThinkClose, body);
    if (close != std::string_view::npos) {
      thinking = text.substr(body, close - body);
      solution_tail = text.substr(close + kThinkClose.size());
    } else {
      thinking = text.substr(body);
      stats.unclosed_think = true;
    }
  }

  const int think_tokens = count_tokens(thinking);
  const int solution_tokens = count_tokens(solution_head) + count_tokens(solution_tail);
  const int total = think_tokens + solution_tokens;
  stats.thinking_proportion = total > 0 ? static_cast<double>(think_tokens) / total : 0.0;

  count_keywords(thinking, lowered, stats.keyword_counts, nullptr);
  count_keywords(solution_head, lowered, stats.keyword_counts, &stats.keywords_in_solution);
  count_keywords(solution_tail, lowered, stats.keyword_counts, &stats.keywords_in_solution);
  return stats;
}

void export_training_curves(const std::filesystem::path& run_log,
                            const std::filesystem::path& out_csv) {
  std::ifstream in(run_log);
  if (!in) throw std::runtime_error("cannot read run log: " + run_log.string());
  std::ofstream out(out_csv);
  if (!out) throw std::runtime_error("cannot write CSV: " + out_csv.string());

  out << "step,mean_length,std_length,accuracy,mean_reward\n";
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      if (!j.contains("type"))
        throw std::runtime_error("missing \"type\" field");
      if (j.at("type") != "step") continue;
      out << j.at("step").get<int>() << ','
          << format_double(j.at("mean_length").get<double>()) << ','
          << format_double(j.at("std_length").get<double>()) << ','
          << format_double(j.at("accuracy").get<double>()) << ','
          << format_double(j.at("mean_reward").get<double>()) << '\n';
    } catch (const std::exception& e) {
      throw std::runtime_error(run_log.string() + " line " + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
}

}  // namespace hbpo
