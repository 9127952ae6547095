#pragma once

namespace waterline {

/// Caps the OpenMP team size used by every parallel kernel. Values < 1 reset
/// to the number of available cores. Results never depend on this setting.
void set_jobs(int jobs);
int jobs();

}  // namespace waterline
