# Feature views
