#include <algorithm>
#include <mutex>

#include "poselift/error.hpp"
#include "poselift/tracking.hpp"

namespace poselift {

namespace {

// Least-squares line through (t_k, x_k) evaluated at `target`.
struct LineFit {
    double t_mean = 0.0;
    double denom = 0.0;  // sum (t - t_mean)^2
    std::vector<double> dt;

    LineFit(std::span<const double> t) : dt(t.size()) {
        for (double v : t) t_mean += v;
        t_mean /= static_cast<double>(t.size());
        for (std::size_t k = 0; k < t.size(); ++k) {
            dt[k] = t[k] - t_mean;
            denom += dt[k] * dt[k];
        }
    }

    template <typename Get>
    double eval(std::size_t n, Get get, double target) const {
        double mean = 0.0;
        for (std::size_t k = 0; k < n; ++k) mean += get(k);
        mean /= static_cast<double>(n);
        if (denom == 0.0) return mean;
        double num = 0.0;
        for (std::size_t k = 0; k < n; ++k) num += dt[k] * (get(k) - mean);
        return mean + num / denom * (target - t_mean);
    }
};

// Keeps min < max after extrapolation by falling back to the last extent.
void repair(double& lo, double& hi, double last_lo, double last_hi) {
    if (lo < hi) return;
    const double centre = 0.5 * (lo + hi);
    const double half = 0.5 * (last_hi - last_lo);
    lo = centre - half;
    hi = centre + half;
}

struct Registry {
    std::mutex mutex;
    std::map<std::string, PredictorFactory> factories;

    Registry() {
        factories["linear"] = [](const PredictorSpec&, int window) {
            return std::make_unique<LinearPredictor>(window);
        };
    }
};

Registry& registry() {
    static Registry r;
    return r;
}

}  // namespace

LinearPredictor::LinearPredictor(int window) : window_(window) {
    if (window_ < 1) throw ValidationError("TrackerConfig.predictor_window: must be >= 1");
}

Prediction LinearPredictor::predict(const Track& track, std::int64_t frame) const {
    std::vector<const TrackState*> hist;
    for (auto it = track.states.rbegin(); it != track.states.rend() && hist.size() < std::size_t(window_); ++it)
        if (it->kind == StateKind::Observed) hist.push_back(&*it);
    if (hist.empty()) throw ValidationError("predict: track has no observed state");
    std::reverse(hist.begin(), hist.end());

    std::vector<double> t(hist.size());
    for (std::size_t k = 0; k < hist.size(); ++k) t[k] = static_cast<double>(hist[k]->frame);
    const LineFit fit(t);
    const double target = static_cast<double>(frame);
    const std::size_t n = hist.size();
    auto line = [&](auto member) {
        return fit.eval(n, [&](std::size_t k) { return member(*hist[k]); }, target);
    };

    const TrackState& last = *hist.back();
    Prediction out;
    out.box3d = {line([](const TrackState& s) { return s.box3d.x_min; }),
                 line([](const TrackState& s) { return s.box3d.x_max; }),
                 line([](const TrackState& s) { return s.box3d.y_min; }),
                 line([](const TrackState& s) { return s.box3d.y_max; }),
                 line([](const TrackState& s) { return s.box3d.z_min; }),
                 line([](const TrackState& s) { return s.box3d.z_max; })};
    repair(out.box3d.x_min, out.box3d.x_max, last.box3d.x_min, last.box3d.x_max);
    repair(out.box3d.y_min, out.box3d.y_max, last.box3d.y_min, last.box3d.y_max);
    repair(out.box3d.z_min, out.box3d.z_max, last.box3d.z_min, last.box3d.z_max);

    out.box2d = {line([](const TrackState& s) { return s.box2d.x_min; }),
                 line([](const TrackState& s) { return s.box2d.y_min; }),
                 line([](const TrackState& s) { return s.box2d.x_max; }),
                 line([](const TrackState& s) { return s.box2d.y_max; })};
    repair(out.box2d.x_min, out.box2d.x_max, last.box2d.x_min, last.box2d.x_max);
    repair(out.box2d.y_min, out.box2d.y_max, last.box2d.y_min, last.box2d.y_max);

    out.pose = last.pose;
    for (std::size_t j = 0; j < out.pose.joints.size(); ++j) {
        auto& joint = out.pose.joints[j];
        joint.x = line([j](const TrackState& s) { return s.pose.joints[j].x; });
        joint.y = line([j](const TrackState& s) { return s.pose.joints[j].y; });
        joint.z = line([j](const TrackState& s) { return s.pose.joints[j].z; });
    }
    return out;
}

Prediction predict(const Track& track, int window) {
    if (track.states.empty()) throw ValidationError("predict: empty track");
    return LinearPredictor(window).predict(track, track.last_frame() + 1);
}

std::unique_ptr<TrajectoryPredictor> make_predictor(const PredictorSpec& spec, int window) {
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    auto it = reg.factories.find(spec.name);
    if (it == reg.factories.end()) throw UnknownName("unknown predictor '" + spec.name + "'");
    return it->second(spec, window);
}

void register_predictor(const std::string& name, PredictorFactory factory) {
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    reg.factories[name] = std::move(factory);
}

}  // namespace poselift
