# Shared configuration, logging and file helpers
