#include "sne/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sne/metrics.hpp"
#include "sne/ops.hpp"
#include "sne/threadpool.hpp"

namespace sne {

namespace {

using i64 = std::int64_t;

std::vector<std::vector<double>> copy_data(const std::vector<Tensor>& params) {
    std::vector<std::vector<double>> out;
    out.reserve(params.size());
    for (const auto& p : params) out.push_back(p.data());
    return out;
}

void load_data(std::vector<Tensor>& params, const std::vector<std::vector<double>>& data,
               const char* what) {
    if (params.size() != data.size())
        throw ValidationError(std::string(what) + ": parameter count mismatch (" +
                              std::to_string(params.size()) + " vs " +
                              std::to_string(data.size()) + ")");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].data().size() != data[i].size())
            throw ValidationError(std::string(what) + ": parameter " + std::to_string(i) +
                                  " size mismatch");
        params[i].mutable_data() = data[i];
    }
}

bool same_config(const TrainConfig& a, const TrainConfig& b) {
    return a.encoder == b.encoder && a.sne.h == b.sne.h && a.sne.H == b.sne.H &&
           a.sne.heads == b.sne.heads && a.sne.chunksize == b.sne.chunksize &&
           a.sne.sab_blocks == b.sne.sab_blocks && a.sne.use_layer_norm == b.sne.use_layer_norm &&
           a.sne.pos_enc_type == b.sne.pos_enc_type && a.sne.pos_enc_level == b.sne.pos_enc_level &&
           a.sne.mask_pad == b.sne.mask_pad && a.sne.max_level == b.sne.max_level &&
           a.predictor_hidden == b.predictor_hidden && a.lr == b.lr &&
           a.batch_size == b.batch_size && a.milestones == b.milestones &&
           a.lr_gamma == b.lr_gamma && a.weight_decay == b.weight_decay &&
           a.grad_clip == b.grad_clip && a.seed == b.seed;
}

Tensor forward_one_sne(const PreparedModel& pm, const SneParams& sp, const PredictorParams& pp) {
    Tensor enc = encode_prepared(pm, sp);
    return predict(pp, reshape(enc, {1, enc.numel()}));  // [1×1]
}

std::vector<double> scores_sne(const SneParams& sp, const PredictorParams& pp,
                               const std::vector<PreparedModel>& models, int threads) {
    std::vector<double> out(models.size(), 0.0);
    parallel_for(static_cast<i64>(models.size()), threads, [&](i64 i) {
        NoGradGuard guard;  // per worker thread
        out[static_cast<std::size_t>(i)] =
            forward_one_sne(models[static_cast<std::size_t>(i)], sp, pp).item();
    });
    return out;
}

std::vector<double> scores_baseline(const BaselineParams& bp, const PredictorParams& pp,
                                    const std::vector<std::vector<double>>& features) {
    NoGradGuard guard;
    Tensor preds = predict(pp, baseline_encode_batch(bp, features));
    return preds.data();
}

double mean_bce(const std::vector<double>& pred, const std::vector<double>& y) {
    constexpr double lo = 1e-7, hi = 1.0 - 1e-7;
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double p = std::clamp(pred[i], lo, hi);
        acc += -(y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p));
    }
    return acc / static_cast<double>(pred.size());
}

}  // namespace

void TrainConfig::validate() const {
    sne.validate();
    if (predictor_hidden < 1) throw ValidationError("train: predictor_hidden must be positive");
    if (!(lr > 0.0)) throw ValidationError("train: lr must be positive");
    if (batch_size < 1) throw ValidationError("train: batch_size must be positive");
    if (epochs < 0) throw ValidationError("train: epochs must be >= 0");
    if (!(lr_gamma > 0.0)) throw ValidationError("train: lr_gamma must be positive");
    if (weight_decay < 0.0) throw ValidationError("train: weight_decay must be >= 0");
    if (grad_clip < 0.0) throw ValidationError("train: grad_clip must be >= 0");
    for (std::size_t i = 1; i < milestones.size(); ++i)
        if (milestones[i] <= milestones[i - 1])
            throw ValidationError("train: milestones must be strictly increasing");
}

std::vector<Tensor> TrainedPredictor::best_parameters() const {
    std::vector<Tensor> params = encoder == EncoderKind::sne ? sne.parameters()
                                                             : baseline.parameters();
    for (const auto& p : predictor.parameters()) params.push_back(p);
    return params;
}

TrainedPredictor train_predictor(const std::vector<const CheckpointModel*>& train_models,
                                 const std::vector<double>& train_y,
                                 const std::vector<const CheckpointModel*>& val_models,
                                 const std::vector<double>& val_y, const TrainConfig& config,
                                 int threads, const TrainedPredictor* resume_from) {
    config.validate();
    if (train_models.empty() || val_models.empty())
        throw ValidationError("train: both train and val splits must be non-empty");
    if (train_models.size() != train_y.size() || val_models.size() != val_y.size())
        throw ValidationError("train: model/label count mismatch");

    TrainedPredictor tp;
    tp.encoder = config.encoder;
    tp.config = config;

    Rng irng(Rng::derive(config.seed, "train/init"));
    if (config.encoder == EncoderKind::sne)
        tp.sne = SneParams::init(config.sne, irng);
    else
        tp.baseline = BaselineParams::init(config.encoder, *train_models[0], config.sne.H, irng);
    tp.predictor = PredictorParams::init({config.sne.H, config.predictor_hidden}, irng);

    std::vector<Tensor> params = tp.best_parameters();  // the working set, trained in place

    i64 start_epoch = 0;
    std::vector<std::vector<double>> best_snapshot;
    AdamState adam;
    TrainHistory history;
    if (resume_from) {
        if (!same_config(resume_from->config, config))
            throw ValidationError("train: resume artifact was produced by a different config");
        tp.source_id = resume_from->source_id;
        best_snapshot = copy_data(resume_from->best_parameters());
        load_data(params, resume_from->last_params, "train resume");
        adam = resume_from->adam;
        start_epoch = resume_from->epochs_done;
        history = resume_from->history;
    }

    // Inputs are static per encoder family: chunked layers for the set
    // encoder, locked feature vectors for the baselines.
    std::vector<PreparedModel> prep_train, prep_val;
    std::vector<std::vector<double>> feat_train, feat_val;
    if (config.encoder == EncoderKind::sne) {
        prep_train.reserve(train_models.size());
        for (const auto* m : train_models)
            prep_train.push_back(prepare_model(*m, config.sne.chunksize));
        prep_val.reserve(val_models.size());
        for (const auto* m : val_models)
            prep_val.push_back(prepare_model(*m, config.sne.chunksize));
    } else {
        feat_train.reserve(train_models.size());
        for (const auto* m : train_models)
            feat_train.push_back(baseline_features(tp.baseline, *m));
        feat_val.reserve(val_models.size());
        for (const auto* m : val_models) feat_val.push_back(baseline_features(tp.baseline, *m));
    }

    const MultistepSchedule schedule(config.lr, config.milestones, config.lr_gamma);
    const i64 n = static_cast<i64>(train_models.size());
    i64 completed = start_epoch;

    for (i64 epoch = start_epoch; epoch < config.epochs; ++epoch) {
        const double lr = schedule.lr_at(epoch);
        const std::vector<std::vector<double>> epoch_params = copy_data(params);
        const AdamState epoch_adam = adam;
        try {
            std::vector<i64> order(static_cast<std::size_t>(n));
            std::iota(order.begin(), order.end(), 0);
            Rng srng(Rng::derive(config.seed, "train/shuffle", static_cast<std::uint64_t>(epoch)));
            srng.shuffle(order);

            double loss_sum = 0.0;
            for (i64 b0 = 0; b0 < n; b0 += config.batch_size) {
                const i64 bn = std::min(config.batch_size, n - b0);
                zero_grads(params);
                if (config.encoder == EncoderKind::sne) {
                    std::vector<MapGradSink> sinks(static_cast<std::size_t>(bn));
                    std::vector<double> losses(static_cast<std::size_t>(bn), 0.0);
                    parallel_for(bn, threads, [&](i64 j) {
                        const i64 i = order[static_cast<std::size_t>(b0 + j)];
                        Tensor pred = forward_one_sne(prep_train[static_cast<std::size_t>(i)],
                                                      tp.sne, tp.predictor);
                        Tensor loss = bce_loss(pred, {train_y[static_cast<std::size_t>(i)]});
                        losses[static_cast<std::size_t>(j)] = loss.item();
                        backward(loss, &sinks[static_cast<std::size_t>(j)]);
                    });
                    const double scale = 1.0 / static_cast<double>(bn);
                    for (auto& sink : sinks) sink.reduce_into_leaves(scale);
                    for (double l : losses) loss_sum += l;
                } else {
                    std::vector<std::vector<double>> batch_feats;
                    std::vector<double> yb;
                    batch_feats.reserve(static_cast<std::size_t>(bn));
                    yb.reserve(static_cast<std::size_t>(bn));
                    for (i64 j = 0; j < bn; ++j) {
                        const i64 i = order[static_cast<std::size_t>(b0 + j)];
                        batch_feats.push_back(feat_train[static_cast<std::size_t>(i)]);
                        yb.push_back(train_y[static_cast<std::size_t>(i)]);
                    }
                    Tensor preds = predict(tp.predictor,
                                           baseline_encode_batch(tp.baseline, batch_feats));
                    Tensor loss = bce_loss(preds, yb);
                    loss_sum += loss.item() * static_cast<double>(bn);
                    backward(loss);
                }
                if (config.grad_clip > 0.0) clip_grad_norm(params, config.grad_clip);
                adam_step(params, adam, lr, config.weight_decay);
            }

            std::vector<double> val_pred =
                config.encoder == EncoderKind::sne
                    ? scores_sne(tp.sne, tp.predictor, prep_val, threads)
                    : scores_baseline(tp.baseline, tp.predictor, feat_val);
            const double vtau = tau_or_zero(val_pred, val_y);
            history.train_loss.push_back(loss_sum / static_cast<double>(n));
            history.val_loss.push_back(mean_bce(val_pred, val_y));
            history.val_tau.push_back(vtau);
            history.lr.push_back(lr);
            completed = epoch + 1;
            if (history.best_epoch < 0 || vtau > history.best_val_tau) {
                history.best_val_tau = vtau;
                history.best_epoch = epoch;
                best_snapshot = copy_data(params);
            }
        } catch (const DivergenceError&) {
            load_data(params, epoch_params, "train divergence rollback");
            adam = epoch_adam;
            history.diverged = true;
            break;
        }
    }

    tp.last_params = copy_data(params);
    tp.adam = std::move(adam);
    tp.epochs_done = completed;
    if (best_snapshot.empty()) best_snapshot = copy_data(params);
    load_data(params, best_snapshot, "train best restore");
    tp.history = std::move(history);
    return tp;
}

std::vector<double> predict_scores(const TrainedPredictor& tp,
                                   const std::vector<const CheckpointModel*>& models,
                                   int threads) {
    if (tp.encoder == EncoderKind::sne) {
        std::vector<PreparedModel> prep;
        prep.reserve(models.size());
        for (const auto* m : models) prep.push_back(prepare_model(*m, tp.config.sne.chunksize));
        return scores_sne(tp.sne, tp.predictor, prep, threads);
    }
    std::vector<std::vector<double>> feats;
    feats.reserve(models.size());
    for (const auto* m : models) feats.push_back(baseline_features(tp.baseline, *m));
    return scores_baseline(tp.baseline, tp.predictor, feats);
}

std::vector<std::vector<double>> encode_models(const TrainedPredictor& tp,
                                               const std::vector<const CheckpointModel*>& models,
                                               int threads) {
    std::vector<std::vector<double>> out(models.size());
    if (tp.encoder == EncoderKind::sne) {
        parallel_for(static_cast<i64>(models.size()), threads, [&](i64 i) {
            NoGradGuard guard;
            out[static_cast<std::size_t>(i)] =
                encode_network(*models[static_cast<std::size_t>(i)], tp.sne).data();
        });
        return out;
    }
    NoGradGuard guard;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const std::vector<std::vector<double>> one{baseline_features(tp.baseline, *models[i])};
        out[i] = baseline_encode_batch(tp.baseline, one).data();
    }
    return out;
}

double tau_or_zero(const std::vector<double>& pred, const std::vector<double>& y) {
    try {
        return kendall_tau(pred, y);
    } catch (const ValidationError&) {
        return 0.0;
    }
}

}  // namespace sne
