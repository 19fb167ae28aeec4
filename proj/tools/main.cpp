#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "cyclecast/cli.hpp"
#include "cyclecast/io_util.hpp"

int main(int argc, char** argv) {
    using cyclecast::cli::RunConfig;

    RunConfig cfg;
    cfg.seed = cyclecast::cli::default_seed();
    std::string models_csv = "ols,huber,lasso,omp,arima,lstm";

    CLI::App app{
        "cyclecast: synthetic menstrual-cycle series and a forecasting-model "
        "comparison harness"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen", "Generate a synthetic series CSV");
    gen->add_option("--case", cfg.case_id,
                    "Regularity regime: 1 regular, 2 semi-regular, 3 irregular");
    gen->add_option("--n", cfg.n_cycles, "Number of cycles to draw");
    gen->add_option("--seed", cfg.seed,
                    "RNG seed (default: CYCLECAST_SEED env var, else 42)");
    gen->add_option("--out", cfg.out_path, "Output series CSV path")->required();
    gen->add_option("--config-out", cfg.config_out,
                    "Also write the generator settings as key=value text");

    auto* eval =
        app.add_subcommand("eval", "Fit models and write a metric comparison");
    eval->add_option("--in", cfg.in_path, "Input series CSV")->required();
    eval->add_option("--out", cfg.out_path, "Output metrics CSV")->required();
    eval->add_option("--models", models_csv,
                     "Comma-separated subset of ols,huber,lasso,omp,arima,lstm");
    eval->add_option("--L", cfg.window_len, "Lag records per input window");
    eval->add_option("--P", cfg.target_len, "Records predicted per window");
    eval->add_option("--horizon", cfg.horizon, "Held-out cycles to forecast");
    eval->add_option("--protocol", cfg.protocol, "recursive | rolling");
    eval->add_option("--channels", cfg.channels, "both | cycle | period");
    eval->add_flag("--round", cfg.round_predictions,
                   "Round predictions to whole days before metrics");
    eval->add_flag("--save-fits", cfg.save_fits,
                   "Write fitted parameters next to the metrics CSV");
    eval->add_option("--delta", cfg.delta, "Huber loss knee");
    eval->add_option("--lambda", cfg.lambda, "Lasso L1 penalty");
    eval->add_option("--k", cfg.k, "OMP predictor budget");
    eval->add_option("--p", cfg.p, "ARIMA autoregressive order");
    eval->add_option("--d", cfg.d, "ARIMA differencing order");
    eval->add_option("--q", cfg.q, "ARIMA moving-average order");
    eval->add_option("--epochs", cfg.epochs,
                     "LSTM epochs (default per --case: 100 for case 1, 1600 "
                     "for cases 2-3)");
    eval->add_option("--lr", cfg.learning_rate, "LSTM learning rate");
    eval->add_option("--arch", cfg.arch,
                     "LSTM architecture: case1 | stacked (default follows "
                     "--case)");
    auto* case_hint = eval->add_option(
        "--case", cfg.case_id, "Regime hint selecting LSTM defaults");
    eval->add_option("--seed", cfg.seed,
                     "Model seed (default: CYCLECAST_SEED env var, else 42)");

    auto* report =
        app.add_subcommand("report", "Render metrics CSVs as one markdown log");
    report
        ->add_option("--in", cfg.eval_inputs,
                     "Metrics CSVs, one section each in the given order")
        ->required();
    report->add_option("--out", cfg.out_path, "Output markdown path")
        ->required();
    report->add_option("--gen-config", cfg.gen_config_path,
                       "Generator config echo file from gen --config-out");
    report->add_option("--series", cfg.series_path,
                       "Series CSV to summarize in the report");

    auto* plot = app.add_subcommand(
        "plotdata", "Emit plot-ready CSVs from a series and eval artifacts");
    plot->add_option("--series", cfg.series_path,
                     "Series CSV for histograms and the boxplot summary");
    plot->add_option("--predictions", cfg.predictions_path,
                     "Predictions sidecar from eval");
    plot->add_option("--loss", cfg.loss_path, "Loss sidecar from eval");
    plot->add_option("--out-dir", cfg.out_dir, "Directory for emitted CSVs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (gen->parsed()) cfg.command = "gen";
    if (eval->parsed()) cfg.command = "eval";
    if (report->parsed()) cfg.command = "report";
    if (plot->parsed()) cfg.command = "plotdata";
    cfg.case_given = case_hint->count() > 0;
    cfg.models = cyclecast::split(models_csv, ',');

    return cyclecast::cli::run_command(cfg, std::cout, std::cerr);
}
