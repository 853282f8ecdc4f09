#pragma once

// Multi-view frame access.  A FrameSource yields synchronized 8-bit BGR
// frames for N cameras; bundles are validated to have matching dimensions.

#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "monoview/errors.hpp"

namespace monoview {

struct FrameBundle {
  int t = 0;
  std::vector<cv::Mat> views;  // one BGR 8UC3 image per camera

  int cameras() const { return static_cast<int>(views.size()); }
};

class FrameSource {
 public:
  virtual ~FrameSource() = default;

  virtual int frame_count() const = 0;
  virtual int camera_count() const = 0;

  // Returns the frame for (t, camera).  Implementations may render lazily;
  // the result is always safe to modify.
  virtual cv::Mat frame(int t, int camera) const = 0;

  FrameBundle bundle(int t) const {
    if (t < 0 || t >= frame_count())
      throw Error(ErrorCode::InvalidConfig,
                  "frame index " + std::to_string(t) + " out of range [0, " +
                      std::to_string(frame_count()) + ")");
    FrameBundle b;
    b.t = t;
    b.views.reserve(camera_count());
    for (int cam = 0; cam < camera_count(); ++cam) {
      cv::Mat f = frame(t, cam);
      if (f.empty() || f.type() != CV_8UC3)
        throw Error(ErrorCode::InputMismatch,
                    "camera " + std::to_string(cam) +
                        " produced an invalid frame at t=" + std::to_string(t));
      if (!b.views.empty() && f.size() != b.views.front().size())
        throw Error(ErrorCode::InputMismatch,
                    "camera " + std::to_string(cam) + " frame size differs at t=" +
                        std::to_string(t));
      b.views.push_back(std::move(f));
    }
    return b;
  }
};

}  // namespace monoview
