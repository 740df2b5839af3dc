namespace spotdyn {}
