"""Synthetic reproductions of the sensing case studies.

* :mod:`.aoa` -- MUSIC direction classification with a uniform linear array;
* :mod:`.classify` -- KNN device classification with stratified folds;
* :mod:`.detectors` -- the WiFi coefficient-of-variation and RFID
  differential-RSSI threshold detectors, with synthetic signal models.
"""

from .aoa import (
    AoAScenario,
    AoASweepPoint,
    ArrayGeometry,
    angle_to_class,
    aoa_sweep,
    estimate_angles,
    music_spectrum,
    simulate_snapshots,
    steering_vector,
)
from .classify import CVReport, FoldResult, cross_validate, knn_classify, stratified_folds
from .detectors import (
    DetectorConfig,
    cov_detect,
    rfid_tag_sweep,
    rssi_detect,
    simulate_csi,
    simulate_rfid,
)
