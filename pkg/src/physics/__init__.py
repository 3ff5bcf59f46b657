# Array geometry, channel, beamforming and correlation models
