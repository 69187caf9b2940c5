# MENET model and training
