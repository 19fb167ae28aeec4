#include "cyclecast/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "cyclecast/datagen.hpp"
#include "cyclecast/errors.hpp"
#include "cyclecast/eval.hpp"
#include "cyclecast/io_util.hpp"
#include "cyclecast/lstm.hpp"
#include "cyclecast/series.hpp"

namespace cyclecast::cli {

namespace {

constexpr const char* kPredictionsHeader = "model,channel,step,actual,predicted";
constexpr const char* kLossHeader = "epoch,loss";
constexpr const char* kMetricsHeader = "model,channel,mae,mse,rmse,horizon,protocol";

std::string stem_of(const std::string& path) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") {
        return path.substr(0, path.size() - 4);
    }
    return path;
}

std::string basename_of(const std::string& path) {
    const auto pos = path.find_last_of('/');
    return pos == std::string::npos ? path : path.substr(pos + 1);
}

void require_exists(const std::string& path, const std::string& role) {
    if (!std::filesystem::exists(path)) {
        throw std::invalid_argument("missing " + role + ": " + path);
    }
}

// Splits a CSV body into trimmed-nothing raw field rows, enforcing the
// header and a fixed field count. Row numbering matches CsvParseError's
// convention: 0 is the header.
std::vector<std::vector<std::string>> parse_csv_body(const std::string& text,
                                                     const std::string& header,
                                                     std::size_t n_fields) {
    auto lines = split(text, '\n');
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty() || lines[0] != header) {
        throw CsvParseError("row 0: expected header '" + header + "'", 0,
                            "header");
    }
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto fields = split(lines[i], ',');
        if (fields.size() != n_fields) {
            throw CsvParseError("row " + std::to_string(i) + ": expected " +
                                    std::to_string(n_fields) + " fields, got " +
                                    std::to_string(fields.size()),
                                i, "fields");
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + dir + ": " + ec.message());
    }
}

datagen::GeneratorConfig generator_for(const RunConfig& config) {
    if (config.case_id < 1 || config.case_id > 3) {
        throw std::invalid_argument("case must be 1, 2, or 3");
    }
    auto gen =
        datagen::case_preset(static_cast<datagen::CaseId>(config.case_id));
    gen.n_cycles = config.n_cycles;
    gen.seed = config.seed;
    datagen::validate(gen);
    return gen;
}

const std::set<std::string>& known_models() {
    static const std::set<std::string> tags = {"ols",  "huber", "lasso",
                                               "omp",  "arima", "lstm"};
    return tags;
}

// Everything checked here fails before any file is touched.
void validate_eval_flags(const RunConfig& config) {
    if (config.in_path.empty()) throw std::invalid_argument("eval requires --in");
    if (config.out_path.empty()) {
        throw std::invalid_argument("eval requires --out");
    }
    if (config.models.empty()) {
        throw std::invalid_argument("at least one model is required");
    }
    std::set<std::string> seen;
    for (const auto& tag : config.models) {
        if (!known_models().count(tag)) {
            throw std::invalid_argument("unknown model '" + tag + "'");
        }
        if (!seen.insert(tag).second) {
            throw std::invalid_argument("model '" + tag + "' listed twice");
        }
    }
    if (config.window_len < 1) throw std::invalid_argument("L must be >= 1");
    if (config.target_len != 1) {
        throw std::invalid_argument(
            "P must be 1: models decode one record per step and the recursive "
            "protocol extends that to any horizon");
    }
    if (config.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    eval::protocol_from_name(config.protocol);
    eval::channel_select_from_name(config.channels);
    if (config.delta <= 0.0) throw std::invalid_argument("delta must be > 0");
    if (config.lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    if (config.k < 1) throw std::invalid_argument("k must be >= 1");
    if (config.p < 0 || config.d < 0 || config.q < 0) {
        throw std::invalid_argument("p, d, q must be >= 0");
    }
    if (config.epochs < 0) throw std::invalid_argument("epochs must be >= 1");
    if (config.learning_rate < 0.0 || config.learning_rate > 1.0) {
        throw std::invalid_argument("learning rate must be in [0, 1]");
    }
    if (!config.arch.empty() && config.arch != "case1" &&
        config.arch != "stacked") {
        throw std::invalid_argument("arch must be 'case1' or 'stacked'");
    }
    if (config.case_given && (config.case_id < 1 || config.case_id > 3)) {
        throw std::invalid_argument("case must be 1, 2, or 3");
    }
}

lstm::Architecture resolve_arch(const RunConfig& config) {
    if (config.arch == "case1") return lstm::Architecture::Case1Arch;
    if (config.arch == "stacked") return lstm::Architecture::StackedArch;
    if (config.case_given && config.case_id != 1) {
        return lstm::Architecture::StackedArch;
    }
    return lstm::Architecture::Case1Arch;
}

int resolve_epochs(const RunConfig& config) {
    if (config.epochs > 0) return config.epochs;
    return (config.case_given && config.case_id != 1) ? 1600 : 100;
}

std::string join_tags(const std::vector<std::string>& tags) {
    std::string out;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        if (i) out += ",";
        out += tags[i];
    }
    return out;
}

std::string run_echo(const RunConfig& config, int epochs,
                     lstm::Architecture arch) {
    KvPairs kv;
    kv.emplace_back("command", "eval");
    kv.emplace_back("input", config.in_path);
    kv.emplace_back("models", join_tags(config.models));
    kv.emplace_back("window_len", std::to_string(config.window_len));
    kv.emplace_back("target_len", std::to_string(config.target_len));
    kv.emplace_back("horizon", std::to_string(config.horizon));
    kv.emplace_back("protocol", config.protocol);
    kv.emplace_back("channels", config.channels);
    kv.emplace_back("round_predictions",
                    config.round_predictions ? "true" : "false");
    kv.emplace_back("seed", std::to_string(config.seed));
    kv.emplace_back("delta", format_double(config.delta));
    kv.emplace_back("lambda", format_double(config.lambda));
    kv.emplace_back("k", std::to_string(config.k));
    kv.emplace_back("arima_orders", std::to_string(config.p) + "," +
                                        std::to_string(config.d) + "," +
                                        std::to_string(config.q));
    kv.emplace_back("epochs", std::to_string(epochs));
    kv.emplace_back("learning_rate", format_double(config.learning_rate));
    kv.emplace_back("architecture", lstm::architecture_name(arch));
    return kv_to_string(kv);
}

std::vector<std::string> selected_channel_names(const RunConfig& config) {
    if (config.channels == "cycle") return {"cycle"};
    if (config.channels == "period") return {"period"};
    return {"cycle", "period"};
}

void emit_histogram(const std::vector<double>& values, const std::string& path) {
    int lo = static_cast<int>(values[0]);
    int hi = lo;
    for (double v : values) {
        lo = std::min(lo, static_cast<int>(v));
        hi = std::max(hi, static_cast<int>(v));
    }
    std::string csv = "bin_left,bin_right,count\n";
    for (int day = lo; day <= hi; ++day) {
        const auto count = std::count(values.begin(), values.end(),
                                      static_cast<double>(day));
        csv += std::to_string(day) + "," + std::to_string(day + 1) + "," +
               std::to_string(count) + "\n";
    }
    write_file_atomic(path, csv);
}

}  // namespace

std::uint64_t default_seed() {
    const char* env = std::getenv("CYCLECAST_SEED");
    if (env == nullptr || *env == '\0') return 42;
    char* end = nullptr;
    const unsigned long long value = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') return 42;
    return static_cast<std::uint64_t>(value);
}

void run_gen(const RunConfig& config, std::ostream& out) {
    if (config.out_path.empty()) throw std::invalid_argument("gen requires --out");
    const auto gen = generator_for(config);
    const auto series = datagen::generate(gen);
    write_file_atomic(config.out_path, series_to_csv(series));
    if (!config.config_out.empty()) {
        write_file_atomic(config.config_out, datagen::config_to_kv(gen));
    }

    const auto summary = datagen::summarize(series);
    out << "wrote " << summary.count << " cycles to " << config.out_path << "\n";
    const auto line = [&](const char* name, const datagen::ChannelSummary& ch) {
        out << name << ": mean=" << format_fixed(ch.mean, 4)
            << " std=" << format_fixed(ch.stddev, 4) << " min=" << ch.min
            << " max=" << ch.max << "\n";
    };
    line("cycle ", summary.cycle);
    line("period", summary.period);
}

void run_eval(const RunConfig& config, std::ostream& out) {
    validate_eval_flags(config);

    const auto series = series_from_csv(read_file(config.in_path));
    if (static_cast<int>(series.size()) <= config.horizon) {
        throw InsufficientHistory(
            "series of " + std::to_string(series.size()) +
                " records cannot hold out a horizon of " +
                std::to_string(config.horizon),
            static_cast<std::size_t>(config.horizon) + 1);
    }

    const int epochs = resolve_epochs(config);
    const auto arch = resolve_arch(config);

    std::vector<eval::ModelSpec> specs;
    for (const auto& tag : config.models) {
        eval::ModelSpec spec;
        spec.tag = tag;
        spec.window_len = config.window_len;
        spec.huber.delta = config.delta;
        spec.lasso.lambda = config.lambda;
        spec.omp.max_predictors = config.k;
        spec.arima_orders = {config.p, config.d, config.q};
        spec.lstm_train.epochs = epochs;
        spec.lstm_train.learning_rate = config.learning_rate;
        spec.lstm_train.seed = config.seed;
        spec.lstm_train.architecture = arch;
        specs.push_back(std::move(spec));
    }

    eval::EvalConfig eval_config;
    eval_config.horizon = config.horizon;
    eval_config.protocol = eval::protocol_from_name(config.protocol);
    eval_config.channels = eval::channel_select_from_name(config.channels);
    eval_config.round_predictions = config.round_predictions;

    const auto comparison = eval::compare_models(series, specs, eval_config);

    const std::string stem = stem_of(config.out_path);
    write_file_atomic(config.out_path, eval::table_to_csv(comparison));
    write_file_atomic(stem + "_run.txt", run_echo(config, epochs, arch));

    std::string predictions = std::string(kPredictionsHeader) + "\n";
    for (const auto& art : comparison.artifacts) {
        for (const auto& channel : selected_channel_names(config)) {
            const bool cycle = channel == "cycle";
            const auto& actual = cycle ? art.actual_cycle : art.actual_period;
            const auto& pred = cycle ? art.predicted_cycle : art.predicted_period;
            for (std::size_t s = 0; s < actual.size(); ++s) {
                predictions += art.model_tag + "," + channel + "," +
                               std::to_string(s + 1) + "," +
                               format_double(actual[s]) + "," +
                               format_double(pred[s]) + "\n";
            }
        }
    }
    write_file_atomic(stem + "_predictions.csv", predictions);

    for (const auto& art : comparison.artifacts) {
        if (art.loss_curve.empty()) continue;
        std::string loss = std::string(kLossHeader) + "\n";
        for (std::size_t e = 0; e < art.loss_curve.size(); ++e) {
            loss += std::to_string(e + 1) + "," +
                    format_double(art.loss_curve[e]) + "\n";
        }
        write_file_atomic(stem + "_loss.csv", loss);
    }

    if (config.save_fits) {
        std::string params;
        for (const auto& art : comparison.artifacts) {
            for (const auto& [label, text] : art.fit_texts) {
                params += "# fit " + art.model_tag + " " + label + "\n" + text;
            }
        }
        write_file_atomic(stem + "_params.txt", params);
    }

    out << eval::table_to_text(comparison);
    out << "wrote " << config.out_path << "\n";
}

void run_report(const RunConfig& config, std::ostream& out) {
    if (config.eval_inputs.empty()) {
        throw std::invalid_argument(
            "report requires at least one --in metrics CSV");
    }
    if (config.out_path.empty()) {
        throw std::invalid_argument("report requires --out");
    }
    for (const auto& path : config.eval_inputs) {
        require_exists(path, "metrics CSV");
    }

    std::string doc = "# Cycle forecasting report\n\n";

    doc += "## Generator configuration\n\n";
    if (!config.gen_config_path.empty()) {
        require_exists(config.gen_config_path, "generator config");
        doc += "```\n" + read_file(config.gen_config_path) + "```\n\n";
    } else {
        doc += "_Not provided; pass --gen-config to echo the generator "
               "settings._\n\n";
    }

    if (!config.series_path.empty()) {
        require_exists(config.series_path, "series CSV");
        const auto series = series_from_csv(read_file(config.series_path));
        const auto s = datagen::summarize(series);
        doc += "## Series summary\n\n";
        doc += "- cycles: " + std::to_string(s.count) + "\n";
        doc += "- cycle length: mean " + format_fixed(s.cycle.mean, 4) +
               ", std " + format_fixed(s.cycle.stddev, 4) + ", range [" +
               std::to_string(s.cycle.min) + ", " + std::to_string(s.cycle.max) +
               "]\n";
        doc += "- period length: mean " + format_fixed(s.period.mean, 4) +
               ", std " + format_fixed(s.period.stddev, 4) + ", range [" +
               std::to_string(s.period.min) + ", " +
               std::to_string(s.period.max) + "]\n\n";
    }

    doc += "## Results\n\n";
    for (const auto& path : config.eval_inputs) {
        const auto rows =
            parse_csv_body(read_file(path), kMetricsHeader, 7);
        doc += "### " + basename_of(path) + "\n\n";
        doc += "| model | channel | mae | mse | rmse | horizon | protocol |\n";
        doc += "| --- | --- | --- | --- | --- | --- | --- |\n";
        for (const auto& fields : rows) {
            doc += "|";
            for (const auto& field : fields) doc += " " + field + " |";
            doc += "\n";
        }
        doc += "\n";

        const std::string run_path = stem_of(path) + "_run.txt";
        if (std::filesystem::exists(run_path)) {
            doc += "Run configuration:\n\n```\n" + read_file(run_path) +
                   "```\n\n";
        }
    }

    write_file_atomic(config.out_path, doc);
    out << "wrote report to " << config.out_path << "\n";
}

void run_plotdata(const RunConfig& config, std::ostream& out) {
    if (config.series_path.empty() && config.predictions_path.empty() &&
        config.loss_path.empty()) {
        throw std::invalid_argument(
            "plotdata requires --series, --predictions, or --loss");
    }
    ensure_directory(config.out_dir);
    const auto target = [&](const char* name) {
        return config.out_dir + "/" + name;
    };

    if (!config.series_path.empty()) {
        require_exists(config.series_path, "series CSV");
        const auto series = series_from_csv(read_file(config.series_path));
        emit_histogram(series.cycle_values(), target("cycle_histogram.csv"));
        emit_histogram(series.period_values(), target("period_histogram.csv"));

        const auto s = datagen::summarize(series);
        std::string box = "channel,min,q1,median,q3,max\n";
        const auto box_row = [&](const char* name,
                                 const datagen::ChannelSummary& ch) {
            box += std::string(name) + "," + std::to_string(ch.min) + "," +
                   format_double(ch.q1) + "," + format_double(ch.median) + "," +
                   format_double(ch.q3) + "," + std::to_string(ch.max) + "\n";
        };
        box_row("cycle", s.cycle);
        box_row("period", s.period);
        write_file_atomic(target("boxplot.csv"), box);
        out << "wrote " << target("cycle_histogram.csv") << ", "
            << target("period_histogram.csv") << ", " << target("boxplot.csv")
            << "\n";
    }

    if (!config.predictions_path.empty()) {
        require_exists(config.predictions_path, "predictions CSV");
        const auto text = read_file(config.predictions_path);
        parse_csv_body(text, kPredictionsHeader, 5);
        write_file_atomic(target("actual_vs_predicted.csv"), text);
        out << "wrote " << target("actual_vs_predicted.csv") << "\n";
    }

    if (!config.loss_path.empty()) {
        require_exists(config.loss_path, "loss CSV");
        const auto text = read_file(config.loss_path);
        parse_csv_body(text, kLossHeader, 2);
        write_file_atomic(target("loss_curve.csv"), text);
        out << "wrote " << target("loss_curve.csv") << "\n";
    }
}

int run_command(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        if (config.command == "gen") {
            run_gen(config, out);
        } else if (config.command == "eval") {
            run_eval(config, out);
        } else if (config.command == "report") {
            run_report(config, out);
        } else if (config.command == "plotdata") {
            run_plotdata(config, out);
        } else {
            throw std::invalid_argument("unknown command '" + config.command +
                                        "'");
        }
        return 0;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const TrainingDiverged& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const DistributionInfeasible& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const InsufficientHistory& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const SingularDesign& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace cyclecast::cli
