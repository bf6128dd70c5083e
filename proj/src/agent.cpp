#include "crossrl/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "crossrl/layout.hpp"

namespace crossrl {

std::size_t PolicyShape::parameter_count() const {
    const auto in = static_cast<std::size_t>(inputs);
    const auto h1 = static_cast<std::size_t>(hidden1);
    const auto h2 = static_cast<std::size_t>(hidden2);
    const auto a = static_cast<std::size_t>(actions);
    return h1 * in + h1 + h2 * h1 + h2 + a * h2 + a + h2 + 1;
}

// Offsets into the flat parameter vector.
struct PolicyLayout {
    std::size_t w1, b1, w2, b2, wp, bp, wv, bv;

    explicit PolicyLayout(const PolicyShape& s) {
        const auto in = static_cast<std::size_t>(s.inputs);
        const auto h1 = static_cast<std::size_t>(s.hidden1);
        const auto h2 = static_cast<std::size_t>(s.hidden2);
        const auto a = static_cast<std::size_t>(s.actions);
        w1 = 0;
        b1 = w1 + h1 * in;
        w2 = b1 + h1;
        b2 = w2 + h2 * h1;
        wp = b2 + h2;
        bp = wp + a * h2;
        wv = bp + a;
        bv = wv + h2;
    }
};

Policy::Policy(PolicyShape shape, std::uint64_t seed) : shape_(shape), params_(shape.parameter_count(), 0.0) {
    const PolicyLayout L(shape_);
    Rng rng(derive_seed(seed, "policy-init"));
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto fill = [&](std::size_t offset, int rows, int cols, double gain) {
        const double scale = gain / std::sqrt(static_cast<double>(cols));
        for (std::size_t i = 0; i < static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); ++i) {
            params_[offset + i] = scale * gauss(rng);
        }
    };
    fill(L.w1, shape_.hidden1, shape_.inputs, std::sqrt(2.0));
    fill(L.w2, shape_.hidden2, shape_.hidden1, std::sqrt(2.0));
    fill(L.wp, shape_.actions, shape_.hidden2, 0.01);
    fill(L.wv, 1, shape_.hidden2, 1.0);
}

namespace {

struct ForwardCache {
    std::vector<double> h1, h2, logits, log_probs, probs;
    double value = 0.0;
};

void run_forward(const PolicyShape& s, std::span<const double> p, std::span<const double> x, ForwardCache& c) {
    const PolicyLayout L(s);
    c.h1.assign(static_cast<std::size_t>(s.hidden1), 0.0);
    c.h2.assign(static_cast<std::size_t>(s.hidden2), 0.0);
    c.logits.assign(static_cast<std::size_t>(s.actions), 0.0);
    for (int i = 0; i < s.hidden1; ++i) {
        const double* row = p.data() + L.w1 + static_cast<std::size_t>(i) * static_cast<std::size_t>(s.inputs);
        double acc = p[L.b1 + static_cast<std::size_t>(i)];
        for (int j = 0; j < s.inputs; ++j) {
            acc += row[j] * x[static_cast<std::size_t>(j)];
        }
        c.h1[static_cast<std::size_t>(i)] = std::tanh(acc);
    }
    for (int i = 0; i < s.hidden2; ++i) {
        const double* row = p.data() + L.w2 + static_cast<std::size_t>(i) * static_cast<std::size_t>(s.hidden1);
        double acc = p[L.b2 + static_cast<std::size_t>(i)];
        for (int j = 0; j < s.hidden1; ++j) {
            acc += row[j] * c.h1[static_cast<std::size_t>(j)];
        }
        c.h2[static_cast<std::size_t>(i)] = std::tanh(acc);
    }
    for (int a = 0; a < s.actions; ++a) {
        const double* row = p.data() + L.wp + static_cast<std::size_t>(a) * static_cast<std::size_t>(s.hidden2);
        double acc = p[L.bp + static_cast<std::size_t>(a)];
        for (int j = 0; j < s.hidden2; ++j) {
            acc += row[j] * c.h2[static_cast<std::size_t>(j)];
        }
        c.logits[static_cast<std::size_t>(a)] = acc;
    }
    double v = p[L.bv];
    for (int j = 0; j < s.hidden2; ++j) {
        v += p[L.wv + static_cast<std::size_t>(j)] * c.h2[static_cast<std::size_t>(j)];
    }
    c.value = v;

    const double top = *std::max_element(c.logits.begin(), c.logits.end());
    double z = 0.0;
    for (double l : c.logits) {
        z += std::exp(l - top);
    }
    const double lse = top + std::log(z);
    c.log_probs.resize(c.logits.size());
    c.probs.resize(c.logits.size());
    for (std::size_t a = 0; a < c.logits.size(); ++a) {
        c.log_probs[a] = c.logits[a] - lse;
        c.probs[a] = std::exp(c.log_probs[a]);
    }
}

}  // namespace

PolicyOutput Policy::forward(std::span<const double> observation) const {
    if (static_cast<int>(observation.size()) != shape_.inputs) {
        throw std::invalid_argument("policy input has the wrong length");
    }
    for (double x : observation) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument("policy input is not finite");
        }
    }
    ForwardCache c;
    run_forward(shape_, params_, observation, c);
    return {std::move(c.logits), std::move(c.probs), c.value};
}

bool Policy::all_finite() const {
    return std::all_of(params_.begin(), params_.end(), [](double x) { return std::isfinite(x); });
}

ActionSample sample_action(std::span<const double> probs, Rng& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    int chosen = -1;
    for (std::size_t a = 0; a < probs.size(); ++a) {
        acc += probs[a];
        if (u < acc && probs[a] > 0.0) {
            chosen = static_cast<int>(a);
            break;
        }
    }
    if (chosen < 0) {
        // rounding left u above the cumulative sum: take the last supported action
        for (std::size_t a = probs.size(); a-- > 0;) {
            if (probs[a] > 0.0) {
                chosen = static_cast<int>(a);
                break;
            }
        }
    }
    return {chosen, std::log(probs[static_cast<std::size_t>(chosen)])};
}

double entropy(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) {
            h -= p * std::log(p);
        }
    }
    return h;
}

GaeResult compute_gae(const Trajectory& trajectory, double gamma, double lambda) {
    const auto& steps = trajectory.steps;
    GaeResult out;
    out.advantages.assign(steps.size(), 0.0);
    out.returns.assign(steps.size(), 0.0);
    double next_value = trajectory.bootstrap_value;
    double running = 0.0;
    for (std::size_t i = steps.size(); i-- > 0;) {
        const Transition& t = steps[i];
        const double continues = t.episode_end ? 0.0 : 1.0;
        const double delta = t.reward + gamma * next_value * continues - t.value;
        running = delta + gamma * lambda * continues * running;
        out.advantages[i] = running;
        out.returns[i] = running + t.value;
        next_value = t.value;
    }
    return out;
}

void PPOConfig::validate() const {
    if (!(clip_ratio > 0.0 && clip_ratio < 1.0)) {
        throw std::invalid_argument("clip ratio must lie in (0, 1)");
    }
    if (!(gamma > 0.0 && gamma <= 1.0) || !(lambda > 0.0 && lambda <= 1.0)) {
        throw std::invalid_argument("gamma and lambda must lie in (0, 1]");
    }
    if (batch_size < 1 || epochs < 1) {
        throw std::invalid_argument("batch size and epochs must be positive");
    }
    if (learning_rate < 0.0) {
        throw std::invalid_argument("learning rate must be nonnegative");
    }
}

LossTerms ppo_loss(const Policy& policy, std::span<const LossSample> batch, const PPOConfig& cfg,
                   std::vector<double>* gradient) {
    const PolicyShape& s = policy.shape();
    const PolicyLayout L(s);
    const auto params = policy.parameters();
    if (gradient) {
        gradient->assign(params.size(), 0.0);
    }
    LossTerms terms;
    if (batch.empty()) {
        return terms;
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    ForwardCache c;
    std::vector<double> dz(static_cast<std::size_t>(s.actions));
    std::vector<double> dh2(static_cast<std::size_t>(s.hidden2));
    std::vector<double> dh1(static_cast<std::size_t>(s.hidden1));
    for (const LossSample& sample : batch) {
        const std::span<const double> x(sample.observation->data(), sample.observation->size());
        run_forward(s, params, x, c);
        const auto a = static_cast<std::size_t>(sample.action);
        const double ratio = std::exp(c.log_probs[a] - sample.old_log_prob);
        const double adv = sample.advantage;
        const double clipped_ratio = std::clamp(ratio, 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio);
        const double unclipped_obj = ratio * adv;
        const double clipped_obj = clipped_ratio * adv;
        // gradient of min(r A, clip(r) A) with respect to log pi(a)
        double surrogate_grad = 0.0;
        if (unclipped_obj <= clipped_obj || clipped_ratio == ratio) {
            surrogate_grad = ratio * adv;
        }
        if (clipped_ratio != ratio) {
            terms.clip_fraction += inv_b;
        }
        double h = 0.0;
        for (std::size_t j = 0; j < c.probs.size(); ++j) {
            h -= c.probs[j] * c.log_probs[j];
        }
        const double verr = c.value - sample.value_target;
        terms.policy += -std::min(unclipped_obj, clipped_obj) * inv_b;
        terms.entropy += h * inv_b;
        terms.value += verr * verr * inv_b;

        if (!gradient) {
            continue;
        }
        auto& g = *gradient;
        for (std::size_t j = 0; j < dz.size(); ++j) {
            const double onehot = j == a ? 1.0 : 0.0;
            dz[j] = (-surrogate_grad * (onehot - c.probs[j]) + cfg.entropy_coef * c.probs[j] * (c.log_probs[j] + h)) * inv_b;
        }
        const double dv = 2.0 * cfg.value_coef * verr * inv_b;

        std::fill(dh2.begin(), dh2.end(), 0.0);
        for (int k = 0; k < s.actions; ++k) {
            const std::size_t row = L.wp + static_cast<std::size_t>(k) * static_cast<std::size_t>(s.hidden2);
            const double dk = dz[static_cast<std::size_t>(k)];
            for (int j = 0; j < s.hidden2; ++j) {
                g[row + static_cast<std::size_t>(j)] += dk * c.h2[static_cast<std::size_t>(j)];
                dh2[static_cast<std::size_t>(j)] += params[row + static_cast<std::size_t>(j)] * dk;
            }
            g[L.bp + static_cast<std::size_t>(k)] += dk;
        }
        for (int j = 0; j < s.hidden2; ++j) {
            g[L.wv + static_cast<std::size_t>(j)] += dv * c.h2[static_cast<std::size_t>(j)];
            dh2[static_cast<std::size_t>(j)] += params[L.wv + static_cast<std::size_t>(j)] * dv;
        }
        g[L.bv] += dv;

        std::fill(dh1.begin(), dh1.end(), 0.0);
        for (int i = 0; i < s.hidden2; ++i) {
            const double hi = c.h2[static_cast<std::size_t>(i)];
            const double da = dh2[static_cast<std::size_t>(i)] * (1.0 - hi * hi);
            const std::size_t row = L.w2 + static_cast<std::size_t>(i) * static_cast<std::size_t>(s.hidden1);
            for (int j = 0; j < s.hidden1; ++j) {
                g[row + static_cast<std::size_t>(j)] += da * c.h1[static_cast<std::size_t>(j)];
                dh1[static_cast<std::size_t>(j)] += params[row + static_cast<std::size_t>(j)] * da;
            }
            g[L.b2 + static_cast<std::size_t>(i)] += da;
        }
        for (int i = 0; i < s.hidden1; ++i) {
            const double hi = c.h1[static_cast<std::size_t>(i)];
            const double da = dh1[static_cast<std::size_t>(i)] * (1.0 - hi * hi);
            const std::size_t row = L.w1 + static_cast<std::size_t>(i) * static_cast<std::size_t>(s.inputs);
            for (int j = 0; j < s.inputs; ++j) {
                g[row + static_cast<std::size_t>(j)] += da * x[static_cast<std::size_t>(j)];
            }
            g[L.b1 + static_cast<std::size_t>(i)] += da;
        }
    }
    terms.total = terms.policy - cfg.entropy_coef * terms.entropy + cfg.value_coef * terms.value;
    return terms;
}

AdamOptimizer::AdamOptimizer(std::size_t size, double beta1, double beta2, double eps)
    : m_(size, 0.0), v_(size, 0.0), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void AdamOptimizer::step(std::span<double> params, std::span<const double> grad, double learning_rate) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
        params[i] -= learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
}

UpdateDiagnostics ppo_update(Policy& policy, AdamOptimizer& optimizer, std::span<const Trajectory> rollouts,
                             const PPOConfig& cfg, Rng& rng) {
    cfg.validate();
    std::vector<LossSample> samples;
    for (const Trajectory& traj : rollouts) {
        const GaeResult gae = compute_gae(traj, cfg.gamma, cfg.lambda);
        for (std::size_t i = 0; i < traj.steps.size(); ++i) {
            const Transition& t = traj.steps[i];
            samples.push_back({&t.observation, t.action, t.log_prob, gae.advantages[i], gae.returns[i]});
        }
    }
    UpdateDiagnostics diag;
    if (samples.empty()) {
        return diag;
    }
    const std::vector<double> snapshot(policy.parameters().begin(), policy.parameters().end());
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<LossSample> batch;
    std::vector<double> grad;
    const auto batch_size = static_cast<std::size_t>(cfg.batch_size);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t stop = std::min(order.size(), start + batch_size);
            batch.clear();
            for (std::size_t i = start; i < stop; ++i) {
                batch.push_back(samples[order[i]]);
            }
            if (cfg.normalize_advantages && batch.size() > 1) {
                double mean = 0.0;
                for (const auto& s : batch) {
                    mean += s.advantage;
                }
                mean /= static_cast<double>(batch.size());
                double var = 0.0;
                for (const auto& s : batch) {
                    var += (s.advantage - mean) * (s.advantage - mean);
                }
                // unbiased std, as torch.std
                const double sd = std::sqrt(var / static_cast<double>(batch.size() - 1));
                for (auto& s : batch) {
                    s.advantage = (s.advantage - mean) / (sd + 1e-8);
                }
            }
            const LossTerms terms = ppo_loss(policy, batch, cfg, &grad);
            if (!std::isfinite(terms.total)) {
                std::copy(snapshot.begin(), snapshot.end(), policy.parameters().begin());
                diag.aborted = true;
                return diag;
            }
            double norm2 = 0.0;
            for (double g : grad) {
                norm2 += g * g;
            }
            const double gnorm = std::sqrt(norm2);
            if (cfg.max_grad_norm > 0.0 && gnorm > cfg.max_grad_norm) {
                const double scale = cfg.max_grad_norm / (gnorm + 1e-6);
                for (double& g : grad) {
                    g *= scale;
                }
            }
            optimizer.step(policy.parameters(), grad, cfg.learning_rate);
            diag.policy_loss += terms.policy;
            diag.value_loss += terms.value;
            diag.entropy += terms.entropy;
            diag.clip_fraction += terms.clip_fraction;
            ++diag.minibatches;
        }
    }
    if (!policy.all_finite()) {
        std::copy(snapshot.begin(), snapshot.end(), policy.parameters().begin());
        diag.aborted = true;
        return diag;
    }
    const double k = 1.0 / diag.minibatches;
    diag.policy_loss *= k;
    diag.value_loss *= k;
    diag.entropy *= k;
    diag.clip_fraction *= k;
    return diag;
}

namespace {

constexpr char kMagic[8] = {'C', 'R', 'R', 'L', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

std::string shape_hash(const PolicyShape& shape) {
    const std::string key =
        fmt::format("mlp-tanh:{}:{}:{}:{}:obs54", shape.inputs, shape.hidden1, shape.hidden2, shape.actions);
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : key) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return fmt::format("{:016x}", h);
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const PolicyShape& s = ckpt.policy.shape();
    nlohmann::ordered_json header = {
        {"format", "crossrl-policy"},
        {"shape", {{"inputs", s.inputs}, {"hidden1", s.hidden1}, {"hidden2", s.hidden2}, {"actions", s.actions}}},
        {"objective", to_string(ckpt.objective)},
        {"step", ckpt.step},
        {"config_hash", ckpt.config_hash.empty() ? shape_hash(s) : ckpt.config_hash},
        {"parameters", ckpt.policy.parameters().size()},
    };
    const std::string text = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write checkpoint " + path.string());
    }
    const std::uint64_t len = text.size();
    out.write(kMagic, sizeof kMagic);
    out.write(reinterpret_cast<const char*>(&kCheckpointVersion), sizeof kCheckpointVersion);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    const auto params = ckpt.policy.parameters();
    out.write(reinterpret_cast<const char*>(params.data()), static_cast<std::streamsize>(params.size() * sizeof(double)));
    if (!out) {
        throw std::runtime_error("failed writing checkpoint " + path.string());
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open checkpoint " + path.string());
    }
    char magic[8];
    std::uint32_t version = 0;
    std::uint64_t len = 0;
    in.read(magic, sizeof magic);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
        throw std::runtime_error("not a crossrl checkpoint: " + path.string());
    }
    if (version != kCheckpointVersion) {
        throw std::runtime_error(fmt::format("unsupported checkpoint version {}", version));
    }
    if (len > (1u << 20)) {
        throw std::runtime_error("corrupt checkpoint header");
    }
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    const auto header = nlohmann::json::parse(text);
    PolicyShape shape;
    shape.inputs = header["shape"]["inputs"];
    shape.hidden1 = header["shape"]["hidden1"];
    shape.hidden2 = header["shape"]["hidden2"];
    shape.actions = header["shape"]["actions"];
    Checkpoint ckpt;
    ckpt.policy = Policy(shape, 0);
    ckpt.objective = objective_from_string(header["objective"].get<std::string>());
    ckpt.step = header["step"];
    ckpt.config_hash = header["config_hash"];
    if (ckpt.config_hash != shape_hash(shape)) {
        throw std::runtime_error("checkpoint config hash does not match its network shape");
    }
    auto params = ckpt.policy.parameters();
    if (header["parameters"].get<std::size_t>() != params.size()) {
        throw std::runtime_error("checkpoint parameter count mismatch");
    }
    in.read(reinterpret_cast<char*>(params.data()), static_cast<std::streamsize>(params.size() * sizeof(double)));
    if (!in) {
        throw std::runtime_error("truncated checkpoint " + path.string());
    }
    return ckpt;
}

std::unique_ptr<Instance> make_instance(std::string id, std::string graph_class, Graph graph, std::uint64_t layout_seed) {
    auto inst = std::make_unique<Instance>();
    inst->id = std::move(id);
    inst->graph_class = std::move(graph_class);
    inst->graph = std::move(graph);
    inst->initial = layout_kamada_kawai(inst->graph, layout_seed);
    inst->embedding = structural_embedding(inst->graph);
    return inst;
}

double Curriculum::ba_probability(double progress) const {
    if (progress < mixed_from) {
        return 0.0;
    }
    if (progress < ba_from) {
        return mixed_ba_probability;
    }
    return late_ba_probability;
}

int sample_instance(std::span<const int> rome, std::span<const int> ba, double ba_probability, Rng& rng) {
    if (rome.empty() && ba.empty()) {
        throw std::invalid_argument("no training instances");
    }
    bool use_ba = uniform01(rng) < ba_probability;
    if (use_ba && ba.empty()) {
        use_ba = false;
    } else if (!use_ba && rome.empty()) {
        use_ba = true;
    }
    const auto& pool = use_ba ? ba : rome;
    return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
}

namespace {

struct Worker {
    Rng rng;
    std::unique_ptr<Environment> env;
    int pending_vertex = -1;
    double episode_return = 0.0;
    std::vector<double> finished_returns;
    Trajectory trajectory;
};

}  // namespace

TrainResult train(const TrainConfig& cfg, std::span<const Instance* const> instances, const TrainCallback& on_update) {
    cfg.ppo.validate();
    if (instances.empty()) {
        throw std::invalid_argument("train: no instances");
    }
    std::vector<int> rome, ba;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        (instances[i]->graph_class == "ba" ? ba : rome).push_back(static_cast<int>(i));
    }

    TrainResult result;
    result.policy = Policy(cfg.shape, derive_seed(cfg.seed, "policy"));
    AdamOptimizer optimizer(result.policy.parameters().size());
    Rng learner_rng(derive_seed(cfg.seed, "learner"));

    std::vector<Worker> workers(static_cast<std::size_t>(cfg.envs));
    for (std::size_t w = 0; w < workers.size(); ++w) {
        workers[w].rng.seed(derive_seed(cfg.seed, "worker", w));
    }

    auto start_episode = [&](Worker& worker, double progress) {
        const int pick = sample_instance(rome, ba, cfg.curriculum.ba_probability(progress), worker.rng);
        const Instance& inst = *instances[static_cast<std::size_t>(pick)];
        worker.env = std::make_unique<Environment>(inst.graph, inst.initial, inst.embedding, cfg.env, worker.rng());
        worker.pending_vertex = -1;
        worker.episode_return = 0.0;
    };

    while (result.steps < cfg.total_steps) {
        const double progress = static_cast<double>(result.steps) / static_cast<double>(cfg.total_steps);
        const Policy snapshot = result.policy;

        auto rollout = [&](Worker& worker) {
            worker.trajectory.steps.clear();
            worker.finished_returns.clear();
            for (int t = 0; t < cfg.rollout_steps; ++t) {
                if (!worker.env || worker.env->done()) {
                    start_episode(worker, progress);
                    if (worker.env->done()) {
                        continue;  // crossing-free instance, nothing to learn here
                    }
                }
                const int v = worker.pending_vertex >= 0 ? worker.pending_vertex : worker.env->select_vertex();
                worker.pending_vertex = -1;
                const FramedObservation o = worker.env->observe(v);
                const PolicyOutput out = snapshot.forward(o.values);
                const ActionSample a = sample_action(out.probs, worker.rng);
                const StepResult r = worker.env->apply_action(v, a.action, o.frame);
                worker.trajectory.steps.push_back({o.values, a.action, a.log_prob, r.reward, out.value, r.done});
                worker.episode_return += r.reward;
                if (r.done) {
                    worker.finished_returns.push_back(worker.episode_return);
                }
            }
            worker.trajectory.bootstrap_value = 0.0;
            if (worker.env && !worker.env->done() && !worker.trajectory.steps.empty()) {
                worker.pending_vertex = worker.env->select_vertex();
                worker.trajectory.bootstrap_value =
                    snapshot.forward(worker.env->observe(worker.pending_vertex).values).value;
            }
        };

        std::vector<std::thread> threads;
        threads.reserve(workers.size());
        for (auto& worker : workers) {
            threads.emplace_back(rollout, std::ref(worker));
        }
        for (auto& th : threads) {
            th.join();
        }

        std::vector<Trajectory> rollouts;
        TrainLogRow row;
        double reward_sum = 0.0;
        long count = 0;
        double returns_sum = 0.0;
        for (auto& worker : workers) {
            for (const auto& t : worker.trajectory.steps) {
                reward_sum += t.reward;
            }
            count += static_cast<long>(worker.trajectory.steps.size());
            for (double r : worker.finished_returns) {
                returns_sum += r;
                ++row.episodes;
            }
            rollouts.push_back(std::move(worker.trajectory));
            worker.trajectory = {};
        }
        if (count == 0) {
            throw std::runtime_error("train: every instance is already crossing-free");
        }
        result.steps += count;
        const UpdateDiagnostics diag = ppo_update(result.policy, optimizer, rollouts, cfg.ppo, learner_rng);
        row.step = result.steps;
        row.mean_reward = reward_sum / static_cast<double>(count);
        row.entropy = diag.entropy;
        row.policy_loss = diag.policy_loss;
        row.value_loss = diag.value_loss;
        row.mean_episode_return = row.episodes > 0 ? returns_sum / row.episodes : 0.0;
        result.log.push_back(row);
        if (on_update) {
            on_update(row, result.policy);
        }
    }
    return result;
}

void write_train_log(const std::vector<TrainLogRow>& log, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write training log " + path.string());
    }
    out << "step,mean_reward,entropy,policy_loss,value_loss\n";
    for (const auto& r : log) {
        out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.step, r.mean_reward, r.entropy, r.policy_loss,
                           r.value_loss);
    }
}

Environment::ActionChooser policy_chooser(const Policy& policy, Rng& rng) {
    return [&policy, &rng](const Observation& o) { return sample_action(policy.forward(o).probs, rng).action; };
}

Environment::ActionChooser uniform_chooser(Rng& rng) {
    return [&rng](const Observation&) { return std::uniform_int_distribution<int>(0, kActions - 1)(rng); };
}

}  // namespace crossrl
