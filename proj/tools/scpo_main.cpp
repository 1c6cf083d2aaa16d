#include "scpo/baseline.hpp"
#include "scpo/dataset.hpp"
#include "scpo/errors.hpp"
#include "scpo/icp.hpp"
#include "scpo/metrics.hpp"
#include "scpo/model_io.hpp"
#include "scpo/search.hpp"
#include "scpo/surrogate.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace {

using namespace scpo;

std::string fmt(const char* spec, double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), spec, v);
    return buffer;
}

// Accepts a value strictly inside (0,1); used for significance levels.
const CLI::Validator UnitOpenInterval{
    [](std::string& s) -> std::string {
        try {
            size_t pos = 0;
            double v = std::stod(s, &pos);
            if (pos == s.size() && v > 0.0 && v < 1.0) return {};
        } catch (...) {
        }
        return "value must lie strictly between 0 and 1";
    },
    "FLOAT in (0,1)"};

int default_jobs() {
    if (const char* env = std::getenv("SCPO_JOBS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return 1;
}

/// Training-side preprocessing: parse, drop all-missing rows, impute column
/// means, fit and apply the normalizer, append the intercept column.
struct TrainingInput {
    Dataset train;
    Normalizer norm;                       // over the raw columns only
    std::vector<std::string> raw_features; // column schema stored in the model
    std::string label_column;
    Eigen::Index dropped = 0;
};

TrainingInput prepare_training(const std::string& path, const std::string& label_col) {
    Dataset raw = load_csv(path, label_col);
    ImputeResult imputed = impute_means(raw, {});
    TrainingInput in;
    in.dropped = imputed.dropped_rows[0];
    in.raw_features = imputed.train.feature_names;
    in.label_column = label_col;
    in.norm = fit_normalizer(imputed.train);
    in.train = add_intercept(apply_normalizer(in.norm, imputed.train));
    if (in.dropped > 0) {
        std::cerr << "note: dropped " << in.dropped << " rows with every feature missing\n";
    }
    return in;
}

ModelFile model_skeleton(const TrainingInput& in, ModelKind kind, Eigen::MatrixXd weights) {
    ModelFile mf;
    mf.kind = kind;
    mf.weights = std::move(weights);
    mf.feature_names = in.raw_features;
    mf.label_column = in.label_column;
    mf.label_names = in.train.label_names;
    mf.has_intercept = true;
    mf.normalizer = in.norm;
    return mf;
}

std::shared_ptr<const ConformityScorer> scorer_for(const ModelFile& mf) {
    if (mf.kind == ModelKind::scpo_linear) {
        return std::make_shared<LinearScorer>(ThetaMatrix(mf.weights));
    }
    ProbModel pm;
    pm.weights = mf.weights;
    return std::make_shared<ProbScorer>(std::move(pm));
}

IcpModel icp_from(const ModelFile& mf, double epsilon) {
    if (!mf.calibration_alphas) {
        throw DataError("model has no calibration scores; run `scpo calibrate` first");
    }
    return IcpModel(scorer_for(mf), CalibrationScores::from_alphas(*mf.calibration_alphas),
                    epsilon);
}

std::vector<PredictionSet> predict_all(const IcpModel& icp, const Dataset& data) {
    std::vector<PredictionSet> sets;
    sets.reserve(static_cast<std::size_t>(data.row_count()));
    for (Eigen::Index i = 0; i < data.row_count(); ++i) {
        sets.push_back(prediction_set(icp, icp.scorer().score_all(data.features.row(i))));
    }
    return sets;
}

// ---------------------------------------------------------------- train ---

struct TrainArgs {
    std::string data, label_col, out;
    double epsilon = 0.0;
    double lambda = 100.0, gamma = 2.0, eta = 10.0;
    std::string transform = "neg-inverse", ineff = "identity";
    int iters = 2000;
    double rel_tol = 1e-7;
};

void run_train(const TrainArgs& a) {
    TrainingInput in = prepare_training(a.data, a.label_col);
    Hyperparams hp;
    hp.epsilon = a.epsilon;
    hp.lambda = a.lambda;
    hp.gamma = a.gamma;
    hp.eta = a.eta;
    hp.transform = parse_transform(a.transform);
    hp.max_iters = a.iters;
    hp.rel_tol = a.rel_tol;
    InefficiencyMeasure measure = InefficiencyMeasure::parse(a.ineff);

    if (hp.eta == 0.0) {
        std::cerr << "warning: --eta 0 performs no updates; the model keeps its zero start\n";
    }

    GradientDescentResult fit = gradient_descent(in.train, hp, measure);
    if (fit.diverged) {
        throw NumericalError(
            "gradient descent diverged to a non-finite loss; try a smaller --eta or --gamma");
    }
    TrainingIcpScore score = training_icp_score(fit.theta, in.train, hp.epsilon, measure);

    std::cout << "iterations: " << (fit.trace.size() - 1) << "\n";
    std::cout << "final loss (" << transform_name(hp.transform)
              << "): " << fmt("%.12g", fit.trace.back()) << "\n";
    std::cout << "training-set ICP at epsilon=" << fmt("%g", hp.epsilon)
              << ": ineff=" << fmt("%.6f", score.ineff) << " acc=" << fmt("%.6f", score.accuracy)
              << "\n";

    ModelFile mf = model_skeleton(in, ModelKind::scpo_linear, fit.theta.entries);
    mf.hyperparams = hp;
    mf.ineff_name = measure.name();
    save_model(mf, a.out);
    std::cout << "wrote model: " << a.out << "\n";
}

// ------------------------------------------------------- train-baseline ---

struct TrainBaselineArgs {
    std::string data, label_col, out;
    int iters = 500;
    double tol = 1e-8;
};

void run_train_baseline(const TrainBaselineArgs& a) {
    TrainingInput in = prepare_training(a.data, a.label_col);
    ProbModel pm = train_multinomial(in.train, a.iters, a.tol);

    std::cout << "iterations: " << pm.iterations << "\n";
    std::cout << "final negative log-likelihood: " << fmt("%.12g", pm.final_nll) << "\n";

    ModelFile mf = model_skeleton(in, ModelKind::multinomial, pm.weights);
    save_model(mf, a.out);
    std::cout << "wrote model: " << a.out << "\n";
}

// ----------------------------------------------------------- gridsearch ---

struct GridArgs {
    std::string data, label_col, out, grid_out;
    double epsilon = 0.0;
    std::vector<double> lambdas, gammas, etas;
    std::string transform = "neg-inverse", ineff = "identity";
    int iters = 2000;
    double rel_tol = 1e-7;
    int jobs = default_jobs();
};

void run_gridsearch(const GridArgs& a) {
    TrainingInput in = prepare_training(a.data, a.label_col);
    GridSpec grid = GridSpec::defaults(a.epsilon, InefficiencyMeasure::parse(a.ineff),
                                       parse_transform(a.transform));
    if (!a.lambdas.empty()) grid.lambdas = a.lambdas;
    if (!a.gammas.empty()) grid.gammas = a.gammas;
    if (!a.etas.empty()) grid.etas = a.etas;
    grid.max_iters = a.iters;
    grid.rel_tol = a.rel_tol;

    GridSearchResult res = grid_search(in.train, grid, a.jobs);

    std::size_t diverged = 0;
    for (const auto& cell : res.cells) diverged += cell.diverged ? 1 : 0;
    if (diverged > 0) {
        std::cerr << "note: " << diverged << " of " << res.cells.size() << " cells diverged\n";
    }
    const Hyperparams& best = res.best.hp;
    std::cout << "cells: " << res.cells.size() << "\n";
    std::cout << "best cell: lambda=" << fmt("%g", best.lambda) << " gamma=" << fmt("%g", best.gamma)
              << " eta=" << fmt("%g", best.eta) << "\n";
    std::cout << "training-set ICP at epsilon=" << fmt("%g", best.epsilon)
              << ": ineff=" << fmt("%.6f", res.best.train_ineff)
              << " acc=" << fmt("%.6f", res.best.train_accuracy) << "\n";

    std::ofstream csv(a.grid_out);
    if (!csv) throw DataError("cannot write grid CSV: " + a.grid_out);
    csv << grid_csv_header() << "\n";
    for (const auto& cell : res.cells) csv << grid_csv_row(cell) << "\n";
    std::cout << "wrote grid: " << a.grid_out << "\n";

    ModelFile mf = model_skeleton(in, ModelKind::scpo_linear, res.best.theta.entries);
    mf.hyperparams = best;
    mf.ineff_name = grid.ineff.name();
    save_model(mf, a.out);
    std::cout << "wrote model: " << a.out << "\n";
}

// ------------------------------------------------------------ calibrate ---

struct CalibrateArgs {
    std::string model, calib, out;
};

void run_calibrate(const CalibrateArgs& a) {
    ModelFile mf = load_model(a.model);
    Dataset calib = dataset_for_model(mf, a.calib, /*require_labels=*/true);
    CalibrationScores scores = calibrate(*scorer_for(mf), calib);
    mf.calibration_alphas = scores.sorted_alphas;
    save_model(mf, a.out);
    std::cout << "calibrated on " << calib.row_count() << " rows\n";
    std::cout << "wrote model: " << a.out << "\n";
}

// -------------------------------------------------------------- predict ---

struct PredictArgs {
    std::string model, data, out;
    double epsilon = 0.0;
};

void run_predict(const PredictArgs& a) {
    ModelFile mf = load_model(a.model);
    IcpModel icp = icp_from(mf, a.epsilon);
    Dataset data = dataset_for_model(mf, a.data, /*require_labels=*/false);
    std::vector<PredictionSet> sets = predict_all(icp, data);

    std::ofstream out(a.out);
    if (!out) throw DataError("cannot write predictions: " + a.out);
    out << "id,epsilon,members,size\n";
    for (std::size_t i = 0; i < sets.size(); ++i) {
        out << (i + 1) << ',' << fmt("%g", a.epsilon) << ',';
        bool first = true;
        for (int y = 1; y <= data.class_count(); ++y) {
            if (!sets[i].contains(y)) continue;
            if (!first) out << '|';
            out << data.label_names[static_cast<std::size_t>(y - 1)];
            first = false;
        }
        out << ',' << sets[i].size() << '\n';
    }
    std::cout << "wrote " << sets.size() << " prediction sets: " << a.out << "\n";
}

// -------------------------------------------------------------- compare ---

struct CompareArgs {
    std::string model_a, model_b, data, labels;
    double epsilon = 0.0;
    std::string ineff = "identity";
};

void run_compare(const CompareArgs& a) {
    ModelFile mf_a = load_model(a.model_a);
    ModelFile mf_b = load_model(a.model_b);
    const std::string label_col = a.labels.empty() ? mf_a.label_column : a.labels;
    mf_a.label_column = label_col;
    mf_b.label_column = label_col;
    if (mf_a.label_names != mf_b.label_names) {
        throw DataError("models disagree on the label vocabulary; they were trained on "
                        "different data");
    }
    InefficiencyMeasure measure = InefficiencyMeasure::parse(a.ineff);

    IcpModel icp_a = icp_from(mf_a, a.epsilon);
    IcpModel icp_b = icp_from(mf_b, a.epsilon);
    Dataset da = dataset_for_model(mf_a, a.data, /*require_labels=*/true);
    Dataset db = dataset_for_model(mf_b, a.data, /*require_labels=*/true);

    std::vector<PredictionSet> sets_a = predict_all(icp_a, da);
    std::vector<PredictionSet> sets_b = predict_all(icp_b, db);

    const double acc_a = coverage(sets_a, da.labels);
    const double acc_b = coverage(sets_b, db.labels);
    const double ineff_a = inefficiency(sets_a, measure);
    const double ineff_b = inefficiency(sets_b, measure);
    const double change = change_in_inefficiency(ineff_a, ineff_b);
    BinomialComparison cmp = binomial_compare(sets_a, sets_b);
    const auto ties =
        static_cast<Eigen::Index>(sets_a.size()) - cmp.wins_a - cmp.wins_b;

    auto hyper = [](const ModelFile& mf, auto pick) {
        return mf.hyperparams ? fmt("%g", pick(*mf.hyperparams)) : std::string("-");
    };
    const double confidence = 100.0 * (1.0 - a.epsilon);
    char line[160];
    std::printf("confidence  model  lambda  gamma   acc      ineff     change\n");
    std::snprintf(line, sizeof(line), "%-11s %-6s %-7s %-7s %-8s %-9s %s\n",
                  fmt("%.1f", confidence).c_str(), "A",
                  hyper(mf_a, [](const Hyperparams& h) { return h.lambda; }).c_str(),
                  hyper(mf_a, [](const Hyperparams& h) { return h.gamma; }).c_str(),
                  fmt("%.4f", acc_a).c_str(), fmt("%.4f", ineff_a).c_str(),
                  fmt("%.1f", change).c_str());
    std::fputs(line, stdout);
    std::snprintf(line, sizeof(line), "%-11s %-6s %-7s %-7s %-8s %-9s %s\n",
                  fmt("%.1f", confidence).c_str(), "B",
                  hyper(mf_b, [](const Hyperparams& h) { return h.lambda; }).c_str(),
                  hyper(mf_b, [](const Hyperparams& h) { return h.gamma; }).c_str(),
                  fmt("%.4f", acc_b).c_str(), fmt("%.4f", ineff_b).c_str(), "-");
    std::fputs(line, stdout);
    std::printf("wins: A=%lld B=%lld ties=%lld\n", static_cast<long long>(cmp.wins_a),
                static_cast<long long>(cmp.wins_b), static_cast<long long>(ties));
    if (std::isnan(cmp.p_value)) {
        std::printf("p-value: NA (every example tied)\n");
    } else {
        std::printf("p-value: %s\n", fmt("%.6g", cmp.p_value).c_str());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conformal classifiers trained to minimize prediction-set size"};
    app.require_subcommand(1);

    const CLI::Validator transform_names =
        CLI::IsMember({"identity", "log", "neg-inverse", "neg-inverse-square"});
    const CLI::Validator ineff_names = CLI::IsMember({"identity", "log"});

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "Fit the surrogate-trained conformity measure");
    train->add_option("--data", ta.data, "training CSV")->required();
    train->add_option("--label-col", ta.label_col, "label column name")->required();
    train->add_option("--epsilon", ta.epsilon, "significance level")
        ->required()
        ->check(UnitOpenInterval);
    train->add_option("--lambda", ta.lambda, "validity penalty weight")->check(CLI::PositiveNumber);
    train->add_option("--gamma", ta.gamma, "sigmoid sharpness")->check(CLI::PositiveNumber);
    train->add_option("--eta", ta.eta, "learning rate")->check(CLI::NonNegativeNumber);
    train->add_option("--transform", ta.transform, "loss transform")->check(transform_names);
    train->add_option("--ineff", ta.ineff, "inefficiency measure")->check(ineff_names);
    train->add_option("--iters", ta.iters, "max gradient steps")->check(CLI::PositiveNumber);
    train->add_option("--rel-tol", ta.rel_tol, "relative stopping tolerance")
        ->check(CLI::NonNegativeNumber);
    train->add_option("--out", ta.out, "output model file")->required();
    train->callback([&ta] { run_train(ta); });

    TrainBaselineArgs ba;
    auto* trainb =
        app.add_subcommand("train-baseline", "Fit the multinomial-logistic baseline measure");
    trainb->add_option("--data", ba.data, "training CSV")->required();
    trainb->add_option("--label-col", ba.label_col, "label column name")->required();
    trainb->add_option("--iters", ba.iters, "max ascent steps")->check(CLI::PositiveNumber);
    trainb->add_option("--tol", ba.tol, "gradient max-norm stop")->check(CLI::NonNegativeNumber);
    trainb->add_option("--out", ba.out, "output model file")->required();
    trainb->callback([&ba] { run_train_baseline(ba); });

    GridArgs ga;
    auto* grid = app.add_subcommand("gridsearch", "Grid-search hyperparameters on training data");
    grid->add_option("--data", ga.data, "training CSV")->required();
    grid->add_option("--label-col", ga.label_col, "label column name")->required();
    grid->add_option("--epsilon", ga.epsilon, "significance level")
        ->required()
        ->check(UnitOpenInterval);
    grid->add_option("--lambda", ga.lambdas, "lambda grid override")->check(CLI::PositiveNumber);
    grid->add_option("--gamma", ga.gammas, "gamma grid override")->check(CLI::PositiveNumber);
    grid->add_option("--eta", ga.etas, "eta grid override")->check(CLI::NonNegativeNumber);
    grid->add_option("--transform", ga.transform, "loss transform")->check(transform_names);
    grid->add_option("--ineff", ga.ineff, "inefficiency measure")->check(ineff_names);
    grid->add_option("--iters", ga.iters, "max gradient steps per cell")
        ->check(CLI::PositiveNumber);
    grid->add_option("--rel-tol", ga.rel_tol, "relative stopping tolerance")
        ->check(CLI::NonNegativeNumber);
    grid->add_option("--jobs", ga.jobs, "worker threads (default from SCPO_JOBS, else 1)")
        ->check(CLI::PositiveNumber);
    grid->add_option("--out", ga.out, "output model file for the winning cell")->required();
    grid->add_option("--grid-out", ga.grid_out, "per-cell CSV output")->required();
    grid->callback([&ga] { run_gridsearch(ga); });

    CalibrateArgs ca;
    auto* calib = app.add_subcommand("calibrate", "Attach calibration scores to a model");
    calib->add_option("--model", ca.model, "trained model file")->required();
    calib->add_option("--calib", ca.calib, "calibration CSV (labeled)")->required();
    calib->add_option("--out", ca.out, "output model file")->required();
    calib->callback([&ca] { run_calibrate(ca); });

    PredictArgs pa;
    auto* predict = app.add_subcommand("predict", "Emit prediction sets for a CSV");
    predict->add_option("--model", pa.model, "calibrated model file")->required();
    predict->add_option("--data", pa.data, "input CSV (labels optional)")->required();
    predict->add_option("--epsilon", pa.epsilon, "significance level for the sets")
        ->required()
        ->check(UnitOpenInterval);
    predict->add_option("--out", pa.out, "prediction CSV output")->required();
    predict->callback([&pa] { run_predict(pa); });

    CompareArgs cmpa;
    auto* compare = app.add_subcommand("compare", "Compare two calibrated models on labeled data");
    compare->add_option("--model-a", cmpa.model_a, "first calibrated model")->required();
    compare->add_option("--model-b", cmpa.model_b, "second calibrated model")->required();
    compare->add_option("--data", cmpa.data, "labeled evaluation CSV")->required();
    compare->add_option("--labels", cmpa.labels,
                        "label column name (default: the one stored in model A)");
    compare->add_option("--epsilon", cmpa.epsilon, "significance level")
        ->required()
        ->check(UnitOpenInterval);
    compare->add_option("--ineff", cmpa.ineff, "inefficiency measure")->check(ineff_names);
    compare->callback([&cmpa] { run_compare(cmpa); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e); // --help and friends: prints and exits 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1; // usage errors always map to 1
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
