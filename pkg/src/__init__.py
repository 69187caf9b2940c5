# MENET multiview Twitter user geolocation
